"""Acceptance criteria 1-10. Each test records one PASS/FAIL line, shown in the terminal summary."""
import json
import time
from fractions import Fraction
from pathlib import Path

import pytest

from igklo.arith import GaussianRational
from igklo.dictionary import (
    ConsistencyError,
    Partition,
    classify,
    coweight_from_partition,
    equal_parity_partitions,
    kappa_translate,
    p_identity,
    partition_from_coweight,
    pbw_dimension,
    shift_matrix,
    split_model_for,
    v_from_partition,
)
from igklo.diffalg import URational
from igklo.images import eta_model, gl_data, image_gl, image_quasisplit, instance, shift_composed_model
from igklo.relations import check_model, suite_drinfeld, suite_gl, suite_quasisplit, suite_split
from igklo.satake import ConfigError
from igklo.truncation import B_kernel_check, centrality_smoke, verify_A_identity

RESULTS: dict = {}

# (label, rank, lambda, mu, tau, orientation)
MATRIX = [
    ("split A1 l=2w m=0", 1, [2], [0], None, None),
    ("split A1 l=2w m=2w", 1, [2], [2], None, None),
    ("split A1 l=4w m=0", 1, [4], [0], None, None),
    ("split A1 l=4w m=2w", 1, [4], [2], None, None),
    ("split A2 l=2w1+2w2 m=0", 2, [2, 2], [0, 0], None, None),
    ("split A2 l=2w1+2w2 m=2w1", 2, [2, 2], [2, 0], None, None),
    ("split A2 l=2w1+2w2 m=-2w1+4w2", 2, [2, 2], [-2, 4], None, None),
    ("split A3 l=2w2 m=0", 3, [0, 2, 0], [0, 0, 0], None, None),
    ("qs A2 l=w1+w2 m=0 1->2", 2, [1, 1], [0, 0], (2, 1), [(1, 2)]),
    ("qs A2 l=w1+w2 m=0 2->1", 2, [1, 1], [0, 0], (2, 1), [(2, 1)]),
    ("qs A3 l=w1+w3 m=0", 3, [1, 0, 1], [0, 0, 0], (3, 2, 1), None),
    ("qs A3 l=w1+w2+w3 m=0", 3, [1, 1, 1], [0, 0, 0], (3, 2, 1), None),
]

GL_CASES = [(2, [2, 0], [0, 2]), (3, [2, 0, 0], [0, 0, 2]), (3, [1, 1, 0], [0, 0, 2])]

# (label, rank, lambda, base mu, tau, nu); the checked coweight is base mu - nu - tau(nu)
SHIFT_PAIRS = [
    ("split A1", 1, [2], [-2], None, [-1]),
    ("split A1", 1, [2], [-4], None, [-2]),
    ("split A1", 1, [0], [-2], None, [-1]),
    ("split A2", 2, [2, 2], [-2, 4], None, [-1, 0]),
    ("split A2", 2, [2, 2], [4, -2], None, [0, -1]),
    ("qs A2", 2, [1, 1], [-2, -2], (2, 1), [-1, -1]),
    ("qs A2", 2, [1, 1], [-2, -2], (2, 1), [-2, 0]),
]

KAPPA_PARTITIONS = [(1, 3), (2, 2), (0, 4), (1, 1, 3), (0, 2, 4)]


def record(k, ok, detail):
    RESULTS[k] = f"criterion {k:>2}: {'PASS' if ok else 'FAIL'}  {detail}"


def admissible(rank, lam, mu, tau, orientation):
    """(GkloData, None) or (None, reason)."""
    try:
        return instance("A", rank, lam, mu, tau=tau, orientation=orientation), None
    except ConfigError as exc:
        return None, str(exc)


@pytest.fixture(scope="module")
def matrix_models():
    out = {}
    for label, rank, lam, mu, tau, orient in MATRIX:
        g, reason = admissible(rank, lam, mu, tau, orient)
        out[label] = (image_quasisplit(g, N=8), tau is None) if g else (None, reason)
    return out


def test_criterion_01_relation_matrix(matrix_models):
    t0 = time.perf_counter()
    bad, skipped, checked = [], [], 0
    for label, (model, split) in matrix_models.items():
        if model is None:
            skipped.append(f"{label}: {split}")
            continue
        for s in [suite_quasisplit] + ([suite_split] if split else []):
            rep = check_model(model, s)
            checked += rep.n_checked
            if not rep.ok():
                bad.append(f"{label} {s.__name__}: {rep.n_failed}")
    run = len(matrix_models) - len(skipped)
    ok = not bad and run >= 10
    record(1, ok, f"{run} instances, {checked} relation checks at N=8, {time.perf_counter() - t0:.0f}s; skipped {skipped} {bad or ''}")
    assert ok, bad


def test_criterion_02_gl_suite():
    bad, checked = [], 0
    for n, lam, mu in GL_CASES:
        gd = gl_data(n, lam, mu)
        assert max(gd.v) <= 2
        rep = check_model(image_gl(gd, N=6), suite_gl)
        checked += rep.n_checked
        if not rep.ok():
            bad.append(f"gl{n} {lam}/{mu}: {rep.n_failed}")
    record(2, not bad, f"{len(GL_CASES)} gl instances (n=2,3), {checked} checks at 6x6 {bad or ''}")
    assert not bad


def test_criterion_03_serre_generating_function(matrix_models):
    bad, checked = [], 0
    for label, (model, _) in matrix_models.items():
        if model is None or not label.startswith("qs A2"):
            continue
        insts = [x for x in suite_quasisplit(model, 8) if x.family == "serreA2"]
        rep = check_model(model, insts, name="serreA2")
        checked += rep.n_checked
        if not rep.ok() or rep.n_checked == 0:
            bad.append(label)
    record(3, not bad and checked > 0, f"{checked} serreA2 generating-function checks, each coefficientwise to order 8, on both orientations {bad or ''}")
    assert not bad and checked > 0


def test_criterion_04_a_identity(matrix_models):
    bad = []
    for label, (m, _) in matrix_models.items():
        if m is None:
            continue
        res = verify_A_identity(m)
        if not all(v["identity"] for v in res["nodes"].values()):
            bad.append(label)
    record(4, not bad, f"exact Cartan-series identity on every admissible matrix instance {bad or ''}")
    assert not bad


def test_criterion_05_shift_homomorphism():
    bad, per_family = [], {}
    for label, rank, lam, base_mu, tau, nu in SHIFT_PAIRS:
        base = image_quasisplit(instance("A", rank, lam, base_mu, tau=tau), N=6)
        sm = shift_composed_model(base, nu)
        for s in [suite_quasisplit] + ([suite_split] if tau is None else []):
            rep = check_model(sm, s)
            if not rep.ok() or rep.n_checked == 0:
                bad.append(f"{label} nu={nu}: {rep.n_failed}")
        per_family[label] = per_family.get(label, 0) + 1
    ok = not bad and all(c >= 2 for c in per_family.values())
    record(5, ok, f"shift-composed models pass, pairs per family {per_family} {bad or ''}")
    assert ok


def test_criterion_06_eta_composition():
    bad = []
    for n, lam, mu in GL_CASES:
        em = eta_model(image_gl(gl_data(n, lam, mu), N=6))
        rep = check_model(em, suite_split)
        if not rep.ok() or rep.n_checked == 0:
            bad.append(f"gl{n} {lam}/{mu}: {rep.n_failed}")
    record(6, not bad, f"eta-composed split models pass the split suite for n=2,3 {bad or ''}")
    assert not bad


def test_criterion_07_truncation(matrix_models):
    bad, kernel_nodes, centrality = [], 0, 0
    for label, (m, _) in matrix_models.items():
        if m is None:
            continue
        a = verify_A_identity(m)
        if any(v["A_modes_beyond_v"] or not v["even"] for v in a["nodes"].values()):
            bad.append(f"{label}: A modes")
        b = B_kernel_check(m)
        kernel_nodes += sum(1 for v in b["nodes"].values() if v["status"] == "pass")
        if not b["ok"]:
            bad.append(f"{label}: B kernel")
        c = centrality_smoke(m)
        centrality += c["checked"]
        if not c["ok"]:
            bad.append(f"{label}: centrality")
    ok = not bad and kernel_nodes > 0
    record(7, ok, f"A modes vanish above v; B polynomial on {kernel_nodes} even-v fixed nodes; {centrality} centrality checks {bad or ''}")
    assert ok


def _type_oracle(p: Partition):
    if p.theta == 0:
        return "C", p.N // 2
    return ("B", (p.N - 1) // 2) if p.N % 2 else ("D", p.N // 2)


def test_criterion_08_dictionary_and_kappa():
    bad, count = [], 0
    for N in range(1, 9):
        for p in equal_parity_partitions(N):
            count += 1
            n, NN, mu = coweight_from_partition(p)
            try:
                if partition_from_coweight(n, NN, mu) != p:
                    bad.append(f"{p.parts} round trip")
                dim = pbw_dimension(p)
            except (ConsistencyError, ConfigError) as exc:
                bad.append(f"{p.parts}: {exc}")
                continue
            # frak v count: fixed-point dimension from v and N directly
            v = v_from_partition(p)
            if dim != 2 * sum(x // 2 for x in v) + N // 2:
                bad.append(f"{p.parts} dim")
            t = classify(p)
            if (t.family, t.k) != _type_oracle(p):
                bad.append(f"{p.parts} type")
            if p_identity(p):
                bad.append(f"{p.parts} P-identity")
    if pbw_dimension(Partition((1, 3))) != 2:
        bad.append("(1,3) dim")
    drs = 0
    literal_fail = {}
    for parts in KAPPA_PARTITIONS:
        p = Partition(parts)
        km = kappa_translate(shift_matrix(p), split_model_for(p, 6))
        rep = check_model(km, suite_drinfeld(km, 6, form="transported"), name="drinfeld")
        drs += rep.n_checked
        if not rep.ok():
            bad.append(f"kappa {parts}: {rep.n_failed}")
        if p.n == 2:
            pr = check_model(km, suite_drinfeld(km, 6, form="literal"), name="literal")
            literal_fail[parts] = sorted({f["family"] for f in pr.failures})
    record(
        8,
        not bad,
        f"{count} partitions (N<=8) exact; kappa models pass drs1-drs5 ({drs} checks, transported forms); "
        f"literal forms fail {literal_fail} {bad or ''}",
    )
    assert not bad


def test_criterion_09_canaries():
    caught = {}
    m = image_quasisplit(instance("A", 2, [1, 1], [0, 0], tau=(2, 1)), N=6, sabotage=True)
    caught["quasisplit"] = check_model(m, suite_quasisplit).n_failed
    m = image_quasisplit(instance("A", 1, [4], [0]), N=6, sabotage=True)
    caught["split"] = check_model(m, suite_split).n_failed
    m = image_gl(gl_data(2, [2, 0], [0, 2]), N=6, sabotage=True)
    caught["gl"] = check_model(m, suite_gl).n_failed
    p = Partition((1, 3))
    km = kappa_translate(shift_matrix(p), split_model_for(p, 6, sabotage=True))
    caught["drinfeld"] = check_model(km, suite_drinfeld(km, 6, form="transported"), name="drinfeld").n_failed
    ok = all(v >= 1 for v in caught.values())
    record(9, ok, f"seeded sign errors detected, failures per suite {caught}")
    assert ok


def test_criterion_10_golden_values():
    m = image_quasisplit(instance("A", 1, [2], [0]), N=8)
    reg = m.ring.reg
    z = m.ring.var("z_{1,1}")
    want_h = URational.const(reg, 1) - URational.from_factors(reg, [], [0, 0], lead=z * z)
    h_ok = (m.exact("H", 1) - want_h).is_zero()
    b = m.exact("B", 1)
    b_terms = m.mode_json("B", 1, 1, 8)
    b_ok = b_terms["1"] == "-i*z_{1,1}" and all(v == "0" for k, v in b_terms.items() if k != "1")
    b_ok = b_ok and m.mode("B", 1, 1).scalar_part() == m.ring.rf(z) * GaussianRational(0, -1)
    golden = json.loads((Path(__file__).parent / "golden" / "ex_a_modes.json").read_text())
    g_ok = m.mode_json("H", 1, 0, 3) == golden["H"] and m.mode_json("B", 1, 1, 3) == golden["B"]
    ok = h_ok and b_ok and g_ok and b is not None
    record(10, ok, "H(u) = 1 - z^2 u^-2 and B(u) = -i z u^-1 exactly; golden JSON matches")
    assert ok


if __name__ == "__main__":
    import sys

    sys.exit(pytest.main([__file__, "-q"]))
