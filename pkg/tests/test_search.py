from itertools import combinations, permutations
from math import comb

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from quintic.core import IngredientSpec, MalformedInput, block_edges
from quintic.devel import DevelopmentRule, develop
from quintic.core import DesignDocument
from quintic.search import (
    BudgetExhausted,
    CoverInstance,
    cyclic_instance,
    design_instance,
    exact_cover,
    feasible_profiles,
    find_cyclic_base_blocks,
    find_design,
    k4e_copies,
    prove_nonexistence,
)
from quintic.verify import verify

BACKENDS = ["numba", "python"]


def brute_force_count(universe, candidates):
    target = set(universe)
    n = 0
    for r in range(len(candidates) + 1):
        for pick in combinations(candidates, r):
            cover = [e for _, es in pick for e in es]
            n += len(cover) == len(set(cover)) and set(cover) == target
    return n


@pytest.mark.parametrize("backend", BACKENDS)
def test_toy_instance(backend):
    inst = CoverInstance(["a", "b", "c"], [("ab", "ab"), ("c", "c"), ("a", "a"), ("bc", "bc")])
    res = exact_cover(inst, backend=backend)
    assert res.count == 2 and res.exhausted
    assert sorted(map(sorted, res.solutions)) == [["a", "bc"], ["ab", "c"]]


@st.composite
def instances(draw):
    n = draw(st.integers(1, 8))
    rows = draw(st.lists(st.sets(st.integers(0, n - 1), min_size=1), min_size=1, max_size=10))
    return CoverInstance(list(range(n)), [(i, sorted(r)) for i, r in enumerate(rows)])


@settings(max_examples=60, deadline=None)
@given(instances(), st.randoms(use_true_random=False))
def test_counts_match_brute_force_and_ignore_order(inst, rnd):
    expect = brute_force_count(inst.universe, inst.candidates)
    a = exact_cover(inst, backend="numba")
    b = exact_cover(inst, backend="python")
    assert a.count == b.count == expect
    assert a.nodes == b.nodes and a.solutions == b.solutions
    cands = list(inst.candidates)
    rnd.shuffle(cands)
    assert exact_cover(CoverInstance(inst.universe, cands)).count == expect


def test_limit_and_budget():
    inst = CoverInstance([0, 1], [(0, [0]), (1, [1]), (2, [0, 1]), (3, [0]), (4, [1])])
    assert exact_cover(inst).count == 5
    res = exact_cover(inst, limit=2)
    assert res.count == 2 and not res.exhausted and len(res.solutions) == 2
    res = exact_cover(inst, budget=2)
    assert not res.exhausted and res.nodes == 3


def test_compile_rejects_bad_instances():
    with pytest.raises(MalformedInput):
        exact_cover(CoverInstance([0, 0], []))
    with pytest.raises(MalformedInput):
        exact_cover(CoverInstance([0], [("x", [])]))
    with pytest.raises(MalformedInput):
        exact_cover(CoverInstance([0], [("x", [1])]))


def injective_copy_count(v):
    """Distinct K4+e edge sets on v points, from all injective placements."""
    return len({block_edges(p) for p in permutations(range(v), 5)})


@pytest.mark.parametrize("v, n", [(5, 30), (6, 180), (7, 630)])
def test_copy_counts(v, n):
    blocks = k4e_copies(range(v))
    assert len(blocks) == n == injective_copy_count(v)
    assert len({block_edges(b) for b in blocks.tolist()}) == n


@pytest.mark.parametrize("backend", BACKENDS)
@pytest.mark.parametrize("v, cands, need", [(5, 30, 2), (6, 180, 4)])
def test_nonexistence(v, cands, need, backend):
    cert = prove_nonexistence(v, backend=backend)
    assert cert.solutions_found == 0 and cert.exhausted
    assert cert.candidate_count == cands and cert.blocks_required == need
    j = cert.to_json()
    for key in ("v", "candidateCount", "nodesExplored", "solutionsFound", "orderingFingerprint"):
        assert key in j


def test_nonexistence_is_backend_independent_and_prefilter_is_sound():
    a, b = prove_nonexistence(6, backend="numba"), prove_nonexistence(6, backend="python")
    assert (a.nodes_explored, a.ordering_fingerprint) == (b.nodes_explored, b.ordering_fingerprint)
    assert prove_nonexistence(6, prefilter=True).solutions_found == 0
    with pytest.raises(MalformedInput):
        prove_nonexistence(7)


def test_feasible_profiles_identity():
    for d1, d3, d4 in feasible_profiles(6):
        assert d1 + 3 * d3 + 4 * d4 == 10


@pytest.mark.parametrize(
    "spec, blocks",
    [
        (IngredientSpec("S", "COMPLETE", 8, sizes=(4,)), 14),
        (IngredientSpec("S", "COMPLETE", 10, sizes=(4,)), 30),
        (IngredientSpec("GDD", "COMPLETE", groups=((2, 4),), sizes=(4,)), 8),
        (IngredientSpec("GDD", "COMPLETE", groups=((2, 4),), sizes=(4, 6)), 8),
        (IngredientSpec("S", "COMPLETE", 4, sizes=(4, 6)), 1),
        (IngredientSpec("S", "COMPLETE", 6, sizes=(4, 6)), 1),
        (IngredientSpec("CS", "COMPLETE", groups=((6, 2),), sizes=(4,)), 45),
        (IngredientSpec("S", "K4E", 7), 7),
    ],
)
def test_find_design(spec, blocks):
    doc = find_design(spec)
    assert doc.block_count == blocks
    assert verify(doc).valid
    assert IngredientSpec.of(doc, spec.sizes) == spec


def test_gdd_instance_shape():
    inst, _ = design_instance(IngredientSpec("GDD", "COMPLETE", groups=((2, 4),), sizes=(4,)))
    assert len(inst.universe) == comb(8, 3) - 4 * 6 == 32
    assert len(inst.candidates) == 16


def test_find_design_none_and_budget():
    assert find_design(IngredientSpec("S", "K4E", 6)) is None
    with pytest.raises(BudgetExhausted):
        find_design(IngredientSpec("S", "COMPLETE", 14, sizes=(4,)), budget=50)


def test_same_design_from_both_backends():
    spec = IngredientSpec("S", "COMPLETE", 10, sizes=(4,))
    assert find_design(spec, backend="numba") == find_design(spec, backend="python")


def test_cyclic_search_recovers_seven_point_base_block():
    res = find_cyclic_base_blocks(7, limit=None)
    assert res.exhausted and res.count == 12
    assert [(0, 1, 2, 4, 5)] in res.solutions
    for sol in res.solutions:
        blocks, _ = develop(sol, DevelopmentRule(7))
        assert verify(DesignDocument("S", "K4E", 7, blocks=blocks)).valid


def test_cyclic_instance_with_short_triple_orbits_is_empty():
    # 3 | 6: the orbit of {0,2,4} has two triples, so no cyclic design
    assert exact_cover(cyclic_instance(6)).count == 0
