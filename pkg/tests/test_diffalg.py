from igklo.arith import make_registry
from igklo.diffalg import DiffRing, URational


def ring():
    return DiffRing(make_registry(w_slots=[(1, 1), (2, 1)]))


def test_shift_commutes_past_coordinate():
    R = ring()
    d = R.shift(1, 1)
    w = R.scalar(R.var("w_{1,1}"))
    assert (d * w - w * d - d).is_zero()
    assert (d * R.scalar(R.var("w_{2,1}")) - R.scalar(R.var("w_{2,1}")) * d).is_zero()


def test_shift_inverse_and_associativity():
    R = ring()
    d, e = R.shift(1, 1), R.shift(2, 1)
    w = R.scalar(R.var("w_{1,1}"))
    assert (d * R.shift(1, 1, -1) - R.one()).is_zero()
    assert ((d * w) * e - d * (w * e)).is_zero()


def test_urational_expansion():
    R = ring()
    U = URational.from_factors(R.reg, [1], [0, 0])
    co = U.expand(4)
    assert co[1] == 1 and co[2] == -1
    assert (U.principal_part() - U).is_zero()
    assert (U * U - U.substitute(1, 0) * U).is_zero()


def test_canonical_json():
    R = ring()
    X = R.shift(1, 1) * R.scalar(R.var("w_{1,1}"))
    assert X.to_json() == [["d_{1,1}", "w_{1,1}+1"]]
    assert R.zero().to_json() == "0"
