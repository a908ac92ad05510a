import pytest

from igklo.images import instance
from igklo.satake import ConfigError, build_diagram, cartan_matrix, coweight_predicates, parse_tau


def test_tau_must_be_involution():
    with pytest.raises(ConfigError):
        build_diagram(cartan_matrix("A", 3), (2, 3, 1))


def test_tau_must_preserve_cartan():
    with pytest.raises(ConfigError):
        build_diagram(cartan_matrix("A", 3), (2, 1, 3))


def test_parse_tau_cycles():
    assert parse_tau([[1, 3]], 3) == (3, 2, 1)
    assert parse_tau(None, 2) == (1, 2)


def test_predicates():
    d = build_diagram(cartan_matrix("A", 2), (2, 1))
    p = coweight_predicates(d, (2, 2))
    assert p["even"] and p["spherical"] and p["dominant"] and p["tau_invariant"]
    assert not coweight_predicates(d, (2, 0))["spherical"]


def test_ex_a_parameters():
    g = instance("A", 1, [2], [0])
    assert g.v == (1,) and g.fv == (0,) and g.theta == (1,)


def test_rejects_odd_mu_and_non_dominant_lambda():
    with pytest.raises(ConfigError):
        instance("A", 1, [2], [1])
    with pytest.raises(ConfigError):
        instance("A", 1, [-2], [-4])


def test_rejects_non_root_lattice_difference():
    with pytest.raises(ConfigError):
        instance("A", 2, [2, 2], [2, 0])
