import pytest

from igklo.images import gl_data, image_gl, image_quasisplit, instance
from igklo.relations import (
    Expr,
    H,
    check_model,
    comm,
    is_homogeneous,
    suite_gl,
    suite_quasisplit,
    suite_split,
)


@pytest.fixture(scope="module")
def ex_a():
    return image_quasisplit(instance("A", 1, [2], [0]), N=6)


def test_expr_algebra():
    a, b = H(1, 1), H(1, 2)
    c = comm(a, b)
    assert (c + comm(b, a)).normalized() == ()
    assert (Expr.one() * a).normalized() == a.normalized()
    assert len(c.terms) == 2


def test_ex_a_suites_pass(ex_a):
    for s in (suite_quasisplit, suite_split):
        rep = check_model(ex_a, s)
        assert rep.ok() and rep.n_checked > 0


def test_emitted_instances_are_homogeneous(ex_a):
    insts = [x for x in suite_quasisplit(ex_a, 6) if x.expr is not None]
    assert insts and all(is_homogeneous(ex_a, x) for x in insts)


def test_out_of_window_is_skipped_not_failed():
    m = image_quasisplit(instance("A", 1, [2], [0]), N=3)
    rep = check_model(m, suite_split, N=6)
    assert rep.ok()
    assert rep.n_skipped > 0
    assert set(rep.skip_reasons) == {"outside validity window"}


def test_sabotage_detected():
    m = image_quasisplit(instance("A", 1, [2], [0]), N=6, sabotage=True)
    assert not check_model(m, suite_quasisplit).ok()


def test_gl_suite_small():
    m = image_gl(gl_data(2, [2, 0], [0, 2]), N=4)
    assert check_model(m, suite_gl).ok()


def test_report_is_deterministic_across_jobs(ex_a):
    a = check_model(ex_a, suite_quasisplit, jobs=1).to_json()
    b = check_model(ex_a, suite_quasisplit, jobs=2).to_json()
    assert a == b
