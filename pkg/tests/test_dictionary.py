import pytest

from igklo.dictionary import (
    Partition,
    classify,
    coweight_from_partition,
    describe,
    equal_parity_partitions,
    p_identity,
    partition_from_coweight,
    pbw_dimension,
)
from igklo.satake import ConfigError


def test_two_part_example():
    rec = describe(partition_from_coweight(2, 4, (2,)))
    assert (rec["partition"], rec["type"], rec["k"], rec["dim"], rec["s12"]) == ([1, 3], "D", 2, 2, 1)


def test_types():
    assert str(classify(Partition((2, 2, 2)))) == "C3"
    assert str(classify(Partition((1, 1, 3)))) == "B2"
    assert str(classify(Partition((1, 3)))) == "D2"


def test_mixed_parity_rejected():
    with pytest.raises(ConfigError):
        Partition((1, 2))


def test_round_trip_and_identities_small():
    for N in range(1, 7):
        for p in equal_parity_partitions(N):
            n, NN, mu = coweight_from_partition(p)
            assert partition_from_coweight(n, NN, mu) == p
            pbw_dimension(p)
            assert p_identity(p) == []
