import pytest

from utils.seeding import MASK64, rng_for, split_seed


def test_split_seed_is_a_pure_function():
    assert split_seed(1, "graph", 0) == split_seed(1, "graph", 0)
    assert 0 <= split_seed(1, "graph", 0) <= MASK64


def test_every_part_of_the_key_matters():
    base = split_seed(1, "graph", 0)
    assert base != split_seed(2, "graph", 0)
    assert base != split_seed(1, "links", 0)
    assert base != split_seed(1, "graph", 1)


def test_rejects_negative_parts():
    with pytest.raises(ValueError):
        split_seed(-1, "graph")
    with pytest.raises(ValueError):
        split_seed(1, "graph", -1)


def test_rng_for_streams_repeat():
    first = rng_for(9, "x", 2).integers(1 << 30, size=4)
    second = rng_for(9, "x", 2).integers(1 << 30, size=4)
    assert first.tolist() == second.tolist()
