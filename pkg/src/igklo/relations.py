"""Relation templates for the algebra presentations and the model checker."""
from __future__ import annotations

import multiprocessing as mp
import os
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Callable

from .arith import Q, format_scalar, scalar
from .diffalg import BiSeries, diffop_sum, TruncationError, UPoleForm, URational, USeries, UnsupportedPole
from .images import GeneratorModel, OutsideWindow

REPORT_VERSION = "1.0"


# ------------------------------------------------------------- expressions


class Expr:
    """Noncommutative polynomial in generator symbols: {word: coefficient}."""

    __slots__ = ("terms",)

    def __init__(self, terms=None):
        self.terms = {w: c for w, c in (terms or {}).items() if c}

    @classmethod
    def sym(cls, family, node, mode):
        return cls({((family, node, mode),): scalar(1)})

    @classmethod
    def one(cls, c=1):
        return cls({(): scalar(c)})

    def __add__(self, o):
        out = dict(self.terms)
        for w, c in o.terms.items():
            out[w] = out[w] + c if w in out else c
        return Expr(out)

    def __neg__(self):
        return Expr({w: -c for w, c in self.terms.items()})

    def __sub__(self, o):
        return self + (-o)

    def scale(self, c):
        c = scalar(c)
        return Expr({w: x * c for w, x in self.terms.items()})

    def __mul__(self, o):
        out: dict = {}
        for w1, c1 in self.terms.items():
            for w2, c2 in o.terms.items():
                w = w1 + w2
                c = c1 * c2
                out[w] = out[w] + c if w in out else c
        return Expr(out)

    def symbols(self):
        return {s for w in self.terms for s in w}

    def normalized(self):
        return tuple(sorted((w, format_scalar(c)) for w, c in self.terms.items()))


def comm(a: Expr, b: Expr) -> Expr:
    return a * b - b * a


def anti(a: Expr, b: Expr) -> Expr:
    return a * b + b * a


def H(i, r, fam="H"):
    return Expr.sym(fam, i, r)


def B(i, s, fam="B"):
    return Expr.sym(fam, i, s)


# ---------------------------------------------------------------- instances


@dataclass
class RelationInstance:
    family: str
    tag: str
    expr: Expr | None = None
    check: Callable | None = None  # series instances: model -> {key: residual DiffOp}
    raw: bool = False  # read modes below the window from the images themselves

    def is_series(self):
        return self.check is not None


def _degree(model: GeneratorModel, word) -> tuple:
    """Q^i-degree of a word: Z for tau-orbits of size 2, Z/2 for fixed nodes."""
    deg = defaultdict(int)
    for fam, i, _ in word:
        if fam in ("B", "E", "cB"):
            ti = model.t(i)
            if ti == i:
                deg[i] = (deg[i] + 1) % 2
            elif ti > i:
                deg[i] += 1
            else:
                deg[ti] -= 1
    return tuple(sorted((k, v) for k, v in deg.items() if v))


def is_homogeneous(model: GeneratorModel, inst: RelationInstance) -> bool:
    if inst.expr is None:
        return True
    degs = {_degree(model, w) for w in inst.expr.terms}
    return len(degs) <= 1


# ----------------------------------------------------- quasi-split templates


def _lo(model, i):
    return -model.mu[i - 1]


def _hb_lower(i, r, j, s, lo_i):
    """[H_i^{(r)}, B_j^{(s-1)}], with the s = 1 convention summed down to the window."""
    if s >= 2:
        return comm(H(i, r), B(j, s - 1))
    out = Expr()
    p = 0
    while r - 2 * p - 2 >= lo_i:
        h = H(i, r - 2 * p - 2)
        out = out + (comm(h, B(j, s + 1)) - anti(h, B(j, s))).scale(Q(1, 4 ** p))
        p += 1
    return out


def suite_quasisplit(model: GeneratorModel, N: int | None = None, deep=False, series=True) -> list:
    N = model.N if N is None else N
    nodes = list(model.nodes)
    c, t = model.c, model.t
    out = []
    for i in nodes:
        lo = _lo(model, i)
        out.append(RelationInstance("def0", f"H_{i}^({lo}) = 1", H(i, lo) - Expr.one(), raw=True))
        for r in (lo - 2, lo - 1):
            out.append(RelationInstance("def0", f"H_{i}^({r}) = 0", H(i, r), raw=True))
    for i in nodes:
        for j in nodes:
            if j < i:
                continue
            for r1 in range(_lo(model, i), N + 1):
                for r2 in range(_lo(model, j), N + 1):
                    out.append(RelationInstance("hhIII", f"[H_{i}^({r1}),H_{j}^({r2})]", comm(H(i, r1), H(j, r2))))
    for i in nodes:
        for r in range(_lo(model, i), N + 1):
            if t(i) > i:
                e = H(i, r) - H(t(i), r).scale((-1) ** r)
                out.append(RelationInstance("htau", f"H_{i}^({r}) = (-1)^r H_{t(i)}^({r})", e))
            elif t(i) == i and r % 2:
                out.append(RelationInstance("htau", f"H_{i}^({r}) = 0", H(i, r)))
    for i in nodes:
        lo = _lo(model, i)
        for j in nodes:
            a = Q(c(i, j) - c(t(i), j), 2)
            b = Q(c(i, j) + c(t(i), j), 2)
            cc = Q(c(i, j) * c(t(i), j), 4)
            for r in range(lo - 2, N - 1):
                for s in range(1, N - 1):
                    e = comm(H(i, r + 2), B(j, s)) - comm(H(i, r), B(j, s + 2))
                    e = e - anti(H(i, r + 1), B(j, s)).scale(a) - anti(H(i, r), B(j, s + 1)).scale(b)
                    e = e - comm(H(i, r), B(j, s)).scale(cc)
                    out.append(RelationInstance("hbNqs", f"i={i} j={j} r={r} s={s}", e))
            if c(t(i), j) == 0:
                for r in range(lo - 1, N):
                    for s in range(1, N):
                        e = comm(H(i, r + 1), B(j, s)) - comm(H(i, r), B(j, s + 1))
                        e = e - anti(H(i, r), B(j, s)).scale(Q(c(i, j), 2))
                        out.append(RelationInstance("alt", f"i={i} j={j} r={r} s={s}", e))
    for i in nodes:
        for j in nodes:
            for s1 in range(1, N):
                for s2 in range(1, N):
                    e = comm(B(i, s1 + 1), B(j, s2)) - comm(B(i, s1), B(j, s2 + 1))
                    e = e - anti(B(i, s1), B(j, s2)).scale(Q(c(i, j), 2))
                    if t(i) == j:
                        e = e - H(j, s1 + s2).scale(2 * (-1) ** s1)
                    out.append(RelationInstance("bbNqs", f"i={i} j={j} s1={s1} s2={s2}", e))
    for i in nodes:
        for j in nodes:
            if i == j or c(i, j) != 0:
                continue
            for s1 in range(1, N + 1):
                for s2 in range(1, N + 1):
                    e = comm(B(i, s1), B(j, s2))
                    if t(i) == j:
                        e = e - H(j, s1 + s2 - 1).scale((-1) ** (s1 - 1))
                    out.append(RelationInstance("bbtau", f"i={i} j={j} s1={s1} s2={s2}", e))
    out += _serre_quasisplit(model, N, deep)
    if series:
        for i in nodes:
            if c(i, t(i)) == -1:
                out.append(_serre_a2_instance(model, i, t(i), N))
    return out


def _triples(N, deep):
    if deep:
        return [(s, s1, s2) for s in range(1, N + 1) for s1 in range(1, N + 1) for s2 in range(1, N + 1)]
    return [(1, 1, s2) for s2 in range(1, N + 1)]


def _serre_lhs(i, j, s, s1, s2):
    f = lambda a, b: comm(B(i, a), comm(B(i, b), B(j, s)))
    return f(s1, s2) + f(s2, s1)


def _serre_quasisplit(model, N, deep):
    out = []
    c, t = model.c, model.t
    for i in model.nodes:
        for j in model.nodes:
            if c(i, j) != -1:
                continue
            if t(i) != i and t(i) != j:
                for s, s1, s2 in _triples(N, deep):
                    e = _serre_lhs(i, j, s, s1, s2)
                    out.append(RelationInstance("Serre-ord", f"i={i} j={j} s={s} s1={s1} s2={s2}", e))
            elif t(i) == i:
                for s, s1, s2 in _triples(N, deep):
                    e = _serre_lhs(i, j, s, s1, s2)
                    e = e - _hb_lower(i, s1 + s2, j, s, _lo(model, i)).scale((-1) ** (s1 - 1))
                    out.append(RelationInstance("SerreIII", f"i={i} j={j} s={s} s1={s1} s2={s2}", e))
            else:
                triples = _triples(N, deep) if deep else [(1, 1, 1)]
                for s, s1, s2 in triples:
                    e = _serre_lhs(i, j, s, s1, s2)
                    e = e - _serre2_rhs(model, i, j, s, s1, s2) - _serre2_rhs(model, i, j, s, s2, s1)
                    out.append(RelationInstance("SerreIII2", f"i={i} j={j} s={s} s1={s1} s2={s2}", e))
    return out


def _serre2_rhs(model, i, j, s, s1, s2):
    lo = _lo(model, j)
    out = Expr()
    p = 0
    while s1 + s - p - 1 >= lo:
        out = out + comm(B(i, s2 + p), H(j, s1 + s - p - 1)).scale(Q(4 * (-1) ** (s1 - 1), 3 ** (p + 1)))
        p += 1
    return out


def _serre_a2_instance(model, i, j, N):
    """[B_i^(1),[B_i^(1),B_j(u)]] = (4u[B_i(3u),H_j(u)])^* on exact forms, then modewise."""

    def check(m: GeneratorModel):
        Bi = m.exact("B", i)
        Bj = m.exact("B", j)
        Hj = m.exact("H", j)
        if Bi is None or Bj is None or Hj is None:
            raise OutsideWindow("serreA2 needs exact generating functions")
        X = m.mode("B", i, 1)
        inner = Bj.left(X) - Bj.right(X)
        lhs = inner.left(X) - inner.right(X)
        B3 = Bi.substitute(3, 0)
        comm_form = B3.mul_urational_right(Hj) - B3.mul_urational_left(Hj)
        rhs = comm_form.scale_by_u_poly(_upoly(m, [0, 4])).principal_part(strict=False)
        diff = lhs - rhs
        res = {}
        S = diff.to_series(N)
        for s in range(1, N + 1):
            X = S.coeffs.get(s)
            if X:
                res[f"u^({-s})"] = X
        if not diff.is_zero():
            res["exact"] = diff
        return res

    return RelationInstance("serreA2", f"i={i} j={j}", check=check)


def _upoly(m, coeffs):
    from .diffalg import UPoly

    return UPoly(m.ring.reg, coeffs)


# ----------------------------------------------------------- split templates


def suite_split(model: GeneratorModel, N: int | None = None, deep=False) -> list:
    N = model.N if N is None else N
    nodes = list(model.nodes)
    c = model.c
    out = []
    for i in nodes:
        lo = _lo(model, i)
        out.append(RelationInstance("def", f"H_{i}^({lo}) = 1", H(i, lo) - Expr.one(), raw=True))
        for r in (lo - 2, lo - 1):
            out.append(RelationInstance("def", f"H_{i}^({r}) = 0", H(i, r), raw=True))
    for i in nodes:
        for j in nodes:
            if j < i:
                continue
            for r1 in range(_lo(model, i), N + 1):
                for r2 in range(_lo(model, j), N + 1):
                    out.append(RelationInstance("hhN", f"[H_{i}^({r1}),H_{j}^({r2})]", comm(H(i, r1), H(j, r2))))
        for r in range(_lo(model, i), N + 1):
            if r % 2:
                out.append(RelationInstance("hhN", f"H_{i}^({r}) = 0", H(i, r)))
    for i in nodes:
        for j in nodes:
            cij = c(i, j)
            for r in range(_lo(model, i) - 2, N - 1):
                for s in range(1, N - 1):
                    e = comm(H(i, r + 2), B(j, s)) - comm(H(i, r), B(j, s + 2))
                    e = e - anti(H(i, r), B(j, s + 1)).scale(cij) - comm(H(i, r), B(j, s)).scale(Q(cij * cij, 4))
                    out.append(RelationInstance("hbN", f"i={i} j={j} r={r} s={s}", e))
    for i in nodes:
        for j in nodes:
            for s1 in range(1, N):
                for s2 in range(1, N):
                    e = comm(B(i, s1 + 1), B(j, s2)) - comm(B(i, s1), B(j, s2 + 1))
                    e = e - anti(B(i, s1), B(j, s2)).scale(Q(c(i, j), 2))
                    if i == j:
                        e = e - H(i, s1 + s2).scale(2 * (-1) ** s1)
                    out.append(RelationInstance("bbN", f"i={i} j={j} s1={s1} s2={s2}", e))
    for i in nodes:
        for j in nodes:
            if c(i, j) == 0:
                for s1 in range(1, N + 1):
                    for s2 in range(1, N + 1):
                        out.append(RelationInstance("bbN2", f"i={i} j={j} s1={s1} s2={s2}", comm(B(i, s1), B(j, s2))))
    for i in nodes:
        for j in nodes:
            if c(i, j) != -1:
                continue
            for s, s1, s2 in _triples(N, deep):
                e = _serre_lhs(i, j, s, s1, s2)
                e = e - _hb_lower(i, s1 + s2, j, s, _lo(model, i)).scale((-1) ** (s1 - 1))
                out.append(RelationInstance("serreN", f"i={i} j={j} s={s} s1={s1} s2={s2}", e))
    return out


# -------------------------------------------------------------- gl templates


def _series(m: GeneratorModel, fam, i, K, alpha=1, shift=0) -> USeries:
    F = m.exact(fam, i)
    if isinstance(F, URational):
        if alpha != 1 or shift:
            F = F.substitute(alpha, shift)
        return USeries.from_urational(m.ring, F, K)
    if alpha != 1 or shift:
        F = F.substitute(alpha, shift)
    return F.to_series(K)


def _bi_residuals(X: BiSeries, N: int) -> dict:
    ou, ov = X.order
    hu = N if ou is None else min(N, ou)
    hv = N if ov is None else min(N, ov)
    return {f"u^({-s}) v^({-t})": Y for (s, t), Y in sorted(X.coeffs.items()) if s <= hu and t <= hv}


def _poly_uv(*terms):
    out = {}
    for (a, b), cf in terms:
        out[(a, b)] = out.get((a, b), 0) + cf
    return {k: v for k, v in out.items() if v}


def _comm_uv(F: USeries, G: USeries) -> BiSeries:
    """[F(u), G(v)]."""
    return BiSeries.outer(F, G) - BiSeries.outer(F, G, flip=True)


def suite_gl(model: GeneratorModel, N: int | None = None, deep=False) -> list:
    N = model.N if N is None else N
    n = model.gl.n
    mu = model.gl.mu
    K = N + 2
    out = []
    for i in range(1, n + 1):
        out.append(RelationInstance("ddgl", f"D_{i}^({mu[i - 1]}) = 1", Expr.sym("D", i, mu[i - 1]) - Expr.one(), raw=True))
        out.append(RelationInstance("ddgl", f"D_{i}^({mu[i - 1] - 1}) = 0", Expr.sym("D", i, mu[i - 1] - 1), raw=True))
        out.append(RelationInstance("ddgl", f"D_{i}(u) Dt_{i}(u) = 1", check=_exact_inverse(i)))
        for j in range(i, n + 1):
            for r in range(mu[i - 1], N + 1):
                for s in range(mu[j - 1], N + 1):
                    e = comm(Expr.sym("D", i, r), Expr.sym("D", j, s))
                    out.append(RelationInstance("ddgl", f"[D_{i}^({r}),D_{j}^({s})]", e))
    for i in range(1, n):
        out.append(RelationInstance("deven", f"i={i}", check=_deven(i)))
        out.append(RelationInstance("de", f"i={i}", check=_de(i, K, N, i)))
        out.append(RelationInstance("ed", f"i={i}", check=_de(i, K, N, i + 1, flip=True)))
        out.append(RelationInstance("ee", f"i={i}", check=_ee(i, K, N)))
        if i + 1 < n:
            out.append(RelationInstance("ee2", f"i={i}", check=_ee2(i, K, N)))
        for j in range(i + 2, n):
            out.append(RelationInstance("ee=0", f"i={i} j={j}", check=_ee0(i, j, K, N)))
    for i in range(1, n):
        for j in (i - 1, i + 1):
            if 1 <= j < n:
                out.append(RelationInstance("serregl", f"i={i} j={j}", check=_serregl(i, j, N)))
    return out


def _exact_inverse(i):
    def check(m):
        P = m.exact("D", i) * m.exact("Dt", i)
        diff = P - URational.const(m.ring.reg, 1)
        return {} if diff.is_zero() else {"exact": str(diff)}

    return check


def _deven(i):
    def check(m):
        R = m.exact("Dt", i) * m.exact("D", i + 1)
        diff = R - R.substitute(-1, i)
        return {} if diff.is_zero() else {"exact": str(diff)}

    return check


def _de(i, K, N, k, flip=False):
    """(de) for D_i (k = i) or (ed) for D_{i+1} (k = i + 1, flip)."""

    def check(m):
        D = _series(m, "D", k, K)
        Eu = _series(m, "E", i, K)
        Ev = Eu
        Em = _series(m, "E", i, K, -1, i)
        q2 = _poly_uv(((2, 0), 1), ((0, 2), -1), ((1, 0), -i), ((0, 1), i))  # (u-v)(u+v-i)
        q_plus = _poly_uv(((1, 0), 1), ((0, 1), 1), ((0, 0), -i))
        q_minus = _poly_uv(((1, 0), 1), ((0, 1), -1))
        c = _comm_uv(D, Ev)
        if flip:
            c = -c
        lhs = c.mul_poly(q2)
        t1 = (BiSeries.in_u(D * Eu) - BiSeries.outer(D, Ev)).mul_poly(q_plus)
        t2 = (BiSeries.outer(D, Ev, flip=True) - BiSeries.in_u(Em * D)).mul_poly(q_minus)
        return _bi_residuals(lhs - t1 - t2, N)

    return check


def _principal_series(m, R: URational, K):
    return USeries.from_urational(m.ring, R.principal_part(), K)


def _ee(i, K, N):
    def check(m):
        Eu = _series(m, "E", i, K)
        P = _principal_series(m, m.exact("Dt", i) * m.exact("D", i + 1), K)
        q2 = _poly_uv(((2, 0), 1), ((0, 2), -1), ((1, 0), -i), ((0, 1), i))
        q_plus = _poly_uv(((1, 0), 1), ((0, 1), 1), ((0, 0), -i))
        q_minus = _poly_uv(((1, 0), 1), ((0, 1), -1))
        lhs = _comm_uv(Eu, Eu).mul_poly(q2)
        sq = BiSeries.in_u(Eu * Eu) - BiSeries.outer(Eu, Eu) - BiSeries.outer(Eu, Eu, flip=True) + BiSeries.in_v(Eu * Eu)
        pp = (BiSeries.in_u(P) - BiSeries.in_v(P)).mul_poly(q_minus)
        return _bi_residuals(lhs + sq.mul_poly(q_plus) + pp, N)

    return check


def _ee2(i, K, N):
    def check(m):
        Ei = _series(m, "E", i, K)
        Ej = _series(m, "E", i + 1, K)
        X1 = m.mode("E", i, 1)
        Y1 = m.mode("E", i + 1, 1)
        q_minus = _poly_uv(((1, 0), 1), ((0, 1), -1))
        lhs = _comm_uv(Ei, Ej).mul_poly(q_minus)
        rhs = -BiSeries.outer(Ei, Ej) + BiSeries.in_v(Ej.left(X1) - Ej.right(X1)) - BiSeries.in_u(Ei.right(Y1) - Ei.left(Y1))
        return _bi_residuals(lhs - rhs, N)

    return check


def _ee0(i, j, K, N):
    def check(m):
        return _bi_residuals(_comm_uv(_series(m, "E", i, K), _series(m, "E", j, K)), N)

    return check


def _serregl(i, j, N):
    """[B_i^(1),[B_i(u),B_j^(1)]] + [B_i(u),[B_i^(1),B_j^(1)]] = (B_j(-u+1/2)H_i(u) - B_j(u+1/2)H_i(u))^*."""

    def check(m):
        if not hasattr(m, "eta"):
            from .images import eta_model

            m.eta = eta_model(m)
        eta = m.eta
        Bi = eta.exact("B", i)
        Bj = eta.exact("B", j)
        Hi = eta.exact("H", i)
        X = eta.mode("B", i, 1)
        Y = eta.mode("B", j, 1)
        inner = Bi.right(Y) - Bi.left(Y)
        lhs = inner.left(X) - inner.right(X)
        Z = X * Y - Y * X
        lhs = lhs + Bi.right(Z) - Bi.left(Z)
        r1 = Bj.substitute(-1, Q(1, 2)).mul_urational_right(Hi)
        r2 = Bj.substitute(1, Q(1, 2)).mul_urational_right(Hi)
        rhs = (r1 - r2).principal_part(strict=False)
        diff = lhs - rhs
        res = {}
        S = diff.to_series(N)
        for s in range(1, N + 1):
            if S.coeffs.get(s):
                res[f"u^({-s})"] = S.coeffs[s]
        if not diff.is_zero():
            res["exact"] = diff
        return res

    return check


# --------------------------------------------------------- Drinfeld templates


def suite_drinfeld(model: GeneratorModel, N: int | None = None, deep=False, form="transported") -> list:
    """Relations drs1-drs5 on families cH (script H) and cB (script B).

    ``form`` "transported" uses the index pattern obtained by pushing the
    split relations through the translation map; "literal" keeps the shifted
    anticommutator index, the opposite H sign and the raised commutator index.
    """
    N = model.N if N is None else N
    nodes = list(model.nodes)
    c = model.c
    out = []
    cH = lambda i, r: H(i, r, "cH")
    cB = lambda i, s: B(i, s, "cB")
    blo = {i: model.window("cB", i)[0] for i in nodes}
    for i in nodes:
        for j in nodes:
            if j < i:
                continue
            for r in range(1, N + 1):
                for s in range(1, N + 1):
                    out.append(RelationInstance("drs1", f"[cH_{i}^({r}),cH_{j}^({s})]", comm(cH(i, r), cH(j, s))))
        for r in range(1, N + 1, 2):
            out.append(RelationInstance("drs1", f"cH_{i}^({r}) = 0", cH(i, r)))
    for i in nodes:
        for j in nodes:
            cij = c(i, j)
            for r in range(1, N):
                for s in range(blo[j], N - 1):
                    e = comm(cH(i, r + 1), cB(j, s)) - comm(cH(i, r - 1), cB(j, s + 2))
                    mid = r if form == "literal" else r - 1
                    e = e - anti(cH(i, mid), cB(j, s + 1)).scale(cij)
                    e = e - comm(cH(i, r - 1), cB(j, s)).scale(Q(cij * cij, 4))
                    out.append(RelationInstance("drs2", f"i={i} j={j} r={r} s={s}", e))
    for i in nodes:
        for j in nodes:
            for r in range(blo[i], N):
                for s in range(blo[j], N):
                    e = comm(cB(i, r + 1), cB(j, s)) - comm(cB(i, r), cB(j, s + 1))
                    e = e - anti(cB(i, r), cB(j, s)).scale(Q(c(i, j), 2))
                    if i == j:
                        sign = 1 if form == "literal" else -1
                        e = e + cH(i, r + s).scale(sign * 2 * (-1) ** r)
                    out.append(RelationInstance("drs3", f"i={i} j={j} r={r} s={s}", e))
    for i in nodes:
        for j in nodes:
            if abs(i - j) > 1:
                for r in range(blo[i], N + 1):
                    for s in range(blo[j], N + 1):
                        out.append(RelationInstance("drs4", f"i={i} j={j} r={r} s={s}", comm(cB(i, r), cB(j, s))))
    for i in nodes:
        for j in nodes:
            if c(i, j) != -1:
                continue
            if deep:
                triples = [(r, r1, r2) for r in range(blo[j], N + 1) for r1 in range(blo[i], N + 1) for r2 in range(blo[i], N + 1)]
            else:
                triples = [(blo[j], blo[i], r2) for r2 in range(blo[i], N + 1)]
            for r, r1, r2 in triples:
                e = _serre_lhs_fam(i, j, r, r1, r2)
                if form == "literal":
                    rhs = _expanded_hb(cH, cB, i, j, r1 + r2 + 1, r).scale((-1) ** r1)
                elif r - 1 >= blo[j]:
                    rhs = comm(cH(i, r1 + r2), cB(j, r - 1)).scale((-1) ** (r1 - 1))
                else:
                    rhs = _expanded_hb(cH, cB, i, j, r1 + r2, r).scale((-1) ** (r1 - 1))
                out.append(RelationInstance("drs5", f"i={i} j={j} r={r} r1={r1} r2={r2}", e - rhs))
    return out


def _expanded_hb(cH, cB, i, j, R, r):
    """sum_p 4^{-p}([cH_i^{(R-2p-2)}, cB_j^{(r+1)}] - [cH_i^{(R-2p-2)}, cB_j^{(r)}]_+) over R - 2p - 2 >= 0."""
    out = Expr()
    p = 0
    while R - 2 * p - 2 >= 0:
        h = cH(i, R - 2 * p - 2)
        out = out + (comm(h, cB(j, r + 1)) - anti(h, cB(j, r))).scale(Q(1, 4 ** p))
        p += 1
    return out


def _serre_lhs_fam(i, j, s, s1, s2):
    f = lambda a, b: comm(B(i, a, "cB"), comm(B(i, b, "cB"), B(j, s, "cB")))
    return f(s1, s2) + f(s2, s1)


# ------------------------------------------------------------------ checker


@dataclass
class FamilyCount:
    checked: int = 0
    passed: int = 0
    failed: int = 0
    skipped: int = 0


@dataclass
class VerificationReport:
    suite: str
    model: dict
    families: dict = field(default_factory=dict)
    failures: list = field(default_factory=list)
    skip_reasons: dict = field(default_factory=dict)
    total: int = 0

    @property
    def n_failed(self):
        return sum(f.failed for f in self.families.values())

    @property
    def n_checked(self):
        return sum(f.checked for f in self.families.values())

    @property
    def n_skipped(self):
        return sum(f.skipped for f in self.families.values())

    def ok(self):
        return self.n_failed == 0

    def to_json(self):
        return {
            "suite": self.suite,
            "model": self.model,
            "instances": self.total,
            "checked": self.n_checked,
            "failed": self.n_failed,
            "skipped": self.n_skipped,
            "families": {
                k: {"checked": v.checked, "passed": v.passed, "failed": v.failed, "skipped": v.skipped}
                for k, v in sorted(self.families.items())
            },
            "skip_reasons": dict(sorted(self.skip_reasons.items())),
            "failures": self.failures,
        }


def _product(model, word, raw, cache):
    X = cache.get(word)
    if X is not None:
        return X
    if len(word) == 0:
        return model.ring.one()
    if len(word) > 1:
        head = _product(model, word[:-1], raw, cache)
        if not head:
            cache[word] = head
            return head
        X = head * _product(model, word[-1:], raw, cache)
    else:
        fam, i, r = word[0]
        if raw:
            t = model.table(fam, i)
            if r > t.hi:
                raise OutsideWindow(f"{fam}_{i}^({r}) above window")
            X = t.getter(r)
        else:
            X = model.mode(fam, i, r)
    cache[word] = X
    return X


def evaluate(model: GeneratorModel, inst: RelationInstance, cache=None):
    """('pass'|'fail'|'skip', residual json or reason)."""
    cache = {} if cache is None else cache
    try:
        if inst.check is not None:
            res = inst.check(model)
            if not res:
                return "pass", None
            return "fail", {k: _json(v) for k, v in list(res.items())[:4]}
        local = cache if not inst.raw else {}
        for w, cf in inst.expr.terms.items():
            # check windows before any arithmetic so skips stay cheap
            for fam, i, r in w:
                t = model.table(fam, i)
                if r > t.hi or (r < t.lo and not t.zero_below and not inst.raw):
                    raise OutsideWindow(f"{fam} mode {r} outside [{t.lo},{t.hi}]")
        parts = [_product(model, w, inst.raw, local).scale(cf) for w, cf in inst.expr.terms.items()]
        acc = diffop_sum(model.ring, parts)
        if acc.is_zero():
            return "pass", None
        return "fail", acc.to_json()
    except (OutsideWindow, TruncationError) as exc:
        return "skip", type(exc).__name__ if isinstance(exc, TruncationError) else "outside validity window"
    except UnsupportedPole as exc:
        raise UnsupportedPole(f"{inst.family} {inst.tag}: {exc}") from exc


def _json(v):
    if hasattr(v, "to_json"):
        return v.to_json()
    return str(v)


_WORKER: dict = {}


def _work(idx_chunk):
    model = _WORKER["model"]
    insts = _WORKER["instances"]
    cache: dict = {}
    return [(k, *evaluate(model, insts[k], cache)) for k in idx_chunk]


def check_model(model: GeneratorModel, suite, N=None, jobs: int = 1, name: str | None = None) -> VerificationReport:
    """Evaluate every instance of a suite (list or suite function) on the model."""
    if callable(suite):
        name = name or suite.__name__.replace("suite_", "")
        instances = suite(model, N)
    else:
        instances = list(suite)
        name = name or "custom"
    results = [None] * len(instances)
    if jobs > 1 and len(instances) > 1 and "fork" in mp.get_all_start_methods():
        _WORKER["model"] = model
        _WORKER["instances"] = instances
        idx = list(range(len(instances)))
        chunks = [idx[k::jobs] for k in range(jobs)]
        ctx = mp.get_context("fork")
        with ctx.Pool(jobs) as pool:
            for part in pool.map(_work, chunks):
                for k, status, info in part:
                    results[k] = (status, info)
        _WORKER.clear()
    else:
        cache: dict = {}
        for k, inst in enumerate(instances):
            results[k] = evaluate(model, inst, cache)
    rep = VerificationReport(name, {"kind": model.kind, "provenance": model.provenance, "N": model.N, "mu": list(model.mu)})
    rep.total = len(instances)
    for inst, (status, info) in zip(instances, results):
        fc = rep.families.setdefault(inst.family, FamilyCount())
        if status == "skip":
            fc.skipped += 1
            rep.skip_reasons[info] = rep.skip_reasons.get(info, 0) + 1
            continue
        fc.checked += 1
        if status == "pass":
            fc.passed += 1
        else:
            fc.failed += 1
            rep.failures.append({"family": inst.family, "tag": inst.tag, "residual": info})
    rep.failures.sort(key=lambda f: (f["family"], f["tag"]))
    return rep


def default_jobs():
    return max(1, min(4, os.cpu_count() or 1))
