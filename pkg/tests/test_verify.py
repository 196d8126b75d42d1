from math import comb

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from quintic import paperdata
from quintic.core import DesignDocument, InvariantViolation, block_edges, relabel
from quintic.verify import (
    _count_k4e_numba,
    _count_k4e_numpy,
    admissible,
    admissible_mask,
    count_k4e_edges,
    degree_profile,
    degree_profiles,
    required_triples,
    template_gcds,
    verify,
)


def drop(doc, i):
    return DesignDocument(doc.kind, doc.family, doc.points, doc.groups, doc.stem, doc.hole, doc.blocks[:i] + doc.blocks[i + 1:])


def test_v10_valid_then_one_block_missing():
    d = paperdata.load("L3.2-s-10")
    rep = verify(d)
    assert rep.valid and rep.block_count == 24 and rep.required_count == 120
    bad = verify(drop(d, 3))
    assert not bad.valid
    assert len(bad.uncovered) == 5 and not bad.multiply_covered
    assert set(bad.uncovered) == set(block_edges(d.blocks[3]))


def test_duplicate_and_forbidden_are_reported():
    d = paperdata.load("L3.4-cs-10^2-0")
    doubled = DesignDocument(d.kind, d.family, d.points, d.groups, d.stem, d.hole, d.blocks + d.blocks[:1])
    rep = verify(doubled)
    assert not rep.valid and len(rep.multiply_covered) == 5
    assert all(c == 2 for _, c in rep.multiply_covered)
    g = d.groups[0]
    inside = DesignDocument(d.kind, d.family, d.points, d.groups, d.stem, d.hole, d.blocks + ((g[0], g[1], g[2], g[3], g[4]),))
    rep = verify(inside)
    assert len(rep.forbidden_covered) == 5
    j = rep.to_json()
    assert j["forbiddenCoveredCount"] == 5 and not j["valid"]


def test_shape_errors_do_not_raise():
    d = DesignDocument("S", "K4E", 7, blocks=[(0, 1, 2, 4, 5), (0, 1, 2), (0, 0, 1, 2, 3), (0, 1, 2, 3, 99)])
    rep = verify(d)
    assert rep.shape_errors == [1, 2, 3]
    assert not rep.valid
    assert "malformed blocks: 3" in rep.render_text()


def test_structure_errors_still_raise():
    with pytest.raises(InvariantViolation):
        verify(DesignDocument("GDD", "K4E", 4, groups=[(0, 1)]))


@pytest.mark.parametrize(
    "doc, count",
    [
        (DesignDocument("GDD", "K4E", 20, groups=[tuple(range(i, i + 5)) for i in range(0, 20, 5)]), 500),
        (DesignDocument("CS", "K4E", 21, groups=[tuple(range(10)), tuple(range(10, 20))], stem=(20,)), 1000),
        (DesignDocument("HS", "K4E", 15, hole=tuple(range(10, 15))), 445),
        (DesignDocument("HS", "K4E", 15, hole=(0, 1)), comb(15, 3)),
        (DesignDocument("CS", "K4E", 12, groups=[tuple(range(6)), tuple(range(6, 12))]), 180),
    ],
)
def test_required_counts(doc, count):
    req = required_triples(doc)
    assert len(req.required) == count
    assert len(req.required) + len(req.forbidden) == comb(doc.points, 3)


def test_complete_family_coverage():
    k4 = DesignDocument("S", "COMPLETE", 4, blocks=[(0, 1, 2, 3)])
    assert verify(k4).valid
    assert not verify(DesignDocument("S", "COMPLETE", 5, blocks=[(0, 1, 2, 3)])).valid


def test_kernels_agree():
    rng = np.random.default_rng(7)
    blocks = np.array([rng.permutation(30)[:5] for _ in range(5000)], dtype=np.int64)
    n = comb(30, 3)
    a = _count_k4e_numba(blocks, np.zeros(n, np.int64))
    b = _count_k4e_numpy(blocks, np.zeros(n, np.int64))
    assert np.array_equal(a, b) and a.sum() == 25000
    assert np.array_equal(count_k4e_edges(blocks, n, jobs=4), a)


def test_threaded_verify_matches():
    d = paperdata.load("L3.3-gdd-10^5")
    assert verify(d, jobs=3).to_json() == verify(d).to_json()


@settings(max_examples=25, deadline=None)
@given(st.permutations(range(16)))
def test_verify_invariant_under_relabeling(perm):
    d = paperdata.load("L3.1-s-16")
    assert verify(relabel(d, perm)).valid
    bad = drop(d, 0)
    assert len(verify(relabel(bad, perm)).uncovered) == 5


def test_template_gcds():
    assert template_gcds() == (5, 1, 1)


@pytest.mark.parametrize("v, adm, exists", [(7, True, True), (8, False, False), (5, True, False), (6, True, False), (4, False, False), (0, False, False)])
def test_admissible_examples(v, adm, exists):
    rep = admissible(v)
    assert rep.admissible is adm and rep.exists_per_theorem is exists


def test_admissible_closed_form_small():
    vs = np.arange(0, 5000)
    mask = admissible_mask(vs)
    assert mask.tolist() == [admissible(int(v)).admissible for v in vs]
    assert mask.tolist() == [bool(v >= 5 and v % 5 in (0, 1, 2)) for v in vs]


def test_degree_profile_examples():
    one = DesignDocument("S", "K4E", 5, blocks=[(0, 1, 2, 3, 4)])
    assert degree_profile(one, 4) == (1, 0, 0)
    assert degree_profile(one, 2) == (0, 0, 1)
    assert degree_profile(one, 0) == (0, 1, 0)
    d7 = paperdata.load("L3.1-s-7")
    prof = degree_profiles(d7)
    assert (prof @ np.array([1, 3, 4]) == 15).all()
    assert tuple(prof[3]) == degree_profile(d7, 3)
