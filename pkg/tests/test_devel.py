import numpy as np
import pytest

from quintic import paperdata
from quintic.devel import (
    DevelopmentError,
    DevelopmentRule,
    ShortOrbitError,
    develop,
    expand_groups,
    expand_multipliers,
    orbit_count,
)


def test_multiplier_examples():
    rule = DevelopmentRule(50, multipliers=(1, 11, 21))
    out = expand_multipliers([(0, 1, 2, 4, 5)], rule)
    assert out == [(0, 1, 2, 4, 5), (0, 11, 22, 44, 5), (0, 21, 42, 34, 5)]


def test_gdd_10_5_expands_to_40_bases():
    raw = paperdata._raw()["L3.3-gdd-10^5"]
    rule = paperdata._rule(raw)
    assert rule.multipliers == (1, 11, 21, 31, 41)
    assert len(expand_multipliers(raw["bases"], rule)) == 40
    assert orbit_count(rule, 8) == 2000


def test_additive_development():
    blocks, pm = develop([(0, 1, 2, 4, 5)], DevelopmentRule(7))
    assert len(blocks) == 7
    assert blocks[3].tolist() == [3, 4, 5, 0, 1]
    assert pm == {i: i for i in range(7)}


def test_fixed_infinity_stays():
    blocks, pm = develop([(8, 1, 0, 5, "inf")], DevelopmentRule(11, fixed_inf=("inf",)))
    assert pm["inf"] == 11
    assert blocks[1].tolist() == [9, 2, 1, 6, 11]
    assert (blocks[:, 4] == 11).all()


def test_cyclic_infinity_class_advances():
    rule = DevelopmentRule(5, cyclic_inf=(("a", "b", "c"),))
    blocks, pm = develop([(0, 1, 2, 3, "a")], rule)
    assert [pm[x] for x in "abc"] == [5, 6, 7]
    assert blocks[:, 4].tolist() == [5, 6, 7, 5, 6]


def test_increment_three():
    raw = paperdata._raw()["L3.4-cs-5^3-0"]
    rule = paperdata._rule(raw)
    blocks, _ = develop(raw["bases"], rule)
    assert len(blocks) == 17 * 5 == orbit_count(rule, 17)


@pytest.mark.parametrize(
    "kwargs",
    [
        {"modulus": 10, "increment": 3},
        {"modulus": 10, "multipliers": (2,)},
        {"modulus": 10, "fixed_inf": ("x", "x")},
        {"modulus": 10, "increment": 2, "cyclic_inf": (("a", "b"),)},
        {"modulus": 10, "multipliers": ()},
    ],
)
def test_bad_rules(kwargs):
    with pytest.raises(DevelopmentError):
        DevelopmentRule(**kwargs)


def test_short_orbit_detected():
    # shifting by 2 swaps x with y and z with u
    with pytest.raises(ShortOrbitError):
        develop([(0, 2, 1, 3, "t")], DevelopmentRule(4, fixed_inf=("t",)))


def test_duplicate_after_multiplier():
    # multiplying by 6 = -1 swaps the pairs again
    with pytest.raises(ShortOrbitError):
        expand_multipliers([(1, 6, 2, 5, 0)], DevelopmentRule(7, multipliers=(1, 6)))


def test_coordinate_errors():
    with pytest.raises(DevelopmentError):
        develop([(0, 1, 2, 3, 3)], DevelopmentRule(7))
    with pytest.raises(DevelopmentError):
        develop([(0, 1, 2, 3, "zz")], DevelopmentRule(7))
    with pytest.raises(DevelopmentError):
        develop([(0, 1, 2, 3, 9)], DevelopmentRule(7))


def test_renaming_infinities_commutes():
    a, _ = develop([(0, 1, 2, "p", "q")], DevelopmentRule(5, fixed_inf=("p", "q")))
    b, _ = develop([(0, 1, 2, "x", "y")], DevelopmentRule(5, fixed_inf=("x", "y")))
    assert np.array_equal(a, b)


def test_expand_groups():
    pm = DevelopmentRule(6, fixed_inf=("i",)).point_map()
    assert expand_groups([{"ap": [2, 3]}, ["i"]], pm) == [(0, 2, 4), (1, 3, 5), (6,)]
