"""Recursive operators that assemble designs from smaller ones.

Every operator places relabelled copies of ingredient designs onto a new
point set and re-verifies the result before returning it.  Ingredients come
from a *supplier*: any callable mapping an :class:`IngredientSpec` to a
verified :class:`DesignDocument`.
"""
from __future__ import annotations

from typing import Callable, Sequence

import numpy as np

from .core import DesignDocument, DesignError, IngredientSpec, canonical_blocks
from .verify import verify

Supplier = Callable[[IngredientSpec], DesignDocument]


class ConstructionError(DesignError):
    pass


def _checked(doc: DesignDocument, expected_blocks: int | None = None) -> DesignDocument:
    doc = doc.canonical()
    if expected_blocks is not None and doc.block_count != expected_blocks:
        raise ConstructionError(f"block count {doc.block_count} != {expected_blocks}")
    rep = verify(doc)
    if not rep.valid:
        raise ConstructionError("assembled design failed verification:\n" + rep.render_text(10))
    return doc


def _expect(doc: DesignDocument, spec: IngredientSpec) -> DesignDocument:
    got = IngredientSpec.of(doc, spec.sizes)
    if doc.family == "COMPLETE":
        sizes = {len(b) for b in doc.blocks}
        ok = got.kind == spec.kind and sizes <= set(spec.sizes) and got.groups == spec.groups
        ok = ok and got.points == spec.points and got.stem == spec.stem
    else:
        ok = got == spec
    if not ok:
        raise ConstructionError(f"supplier returned {got} for {spec}")
    return doc


def _place(ing: DesignDocument, perm: np.ndarray) -> list[tuple[int, ...]]:
    """Blocks of ``ing`` under the point map ``perm``."""
    if ing.family == "K4E":
        return [tuple(r) for r in canonical_blocks(perm[ing.block_array()]).tolist()]
    return [tuple(sorted(int(perm[p]) for p in b)) for b in ing.blocks]


def _map_runs(n: int, pairs: Sequence[tuple[Sequence[int], Sequence[int]]]) -> np.ndarray:
    """Point map sending each source run onto its target run, both sorted."""
    perm = np.full(n, -1, dtype=np.int64)
    for src, dst in pairs:
        src, dst = sorted(src), sorted(dst)
        if len(src) != len(dst):
            raise ConstructionError(f"cannot map {len(src)} points onto {len(dst)}")
        perm[src] = dst
    if (perm < 0).any():
        raise ConstructionError("ingredient points left unmapped")
    return perm


# -- Construction: weighting ----------------------------------------------------


def weight_gdd(master: DesignDocument, h: int, supplier: Supplier) -> DesignDocument:
    """Inflate every master point to ``h`` points; each master block of size
    ``k`` is replaced by a K4+e GDD of type ``h^k`` on its cells.

    An S master is read as a GDD of type ``1^v``.
    """
    if master.family != "COMPLETE" or master.kind not in ("GDD", "S"):
        raise ConstructionError("weighting needs a GDD or S master of the COMPLETE family")
    groups = master.groups if master.kind == "GDD" else tuple((p,) for p in range(master.points))
    cell = lambda x: [x * h + i for i in range(h)]  # noqa: E731
    blocks: list = []
    expected = 0
    for A in master.blocks:
        A = sorted(A)
        ing = _expect(supplier(IngredientSpec("GDD", "K4E", groups=((h, len(A)),))), IngredientSpec("GDD", "K4E", groups=((h, len(A)),)))
        perm = _map_runs(ing.points, [(g, cell(x)) for g, x in zip(ing.groups, A)])
        blocks += _place(ing, perm)
        expected += ing.block_count
    out = DesignDocument(
        "GDD", "K4E", master.points * h, [sum((cell(x) for x in G), []) for G in groups], (), (), blocks
    )
    return _checked(out, expected)


# -- Construction: candelabra from pairs ----------------------------------------


def cs_from_pairs(gdd: DesignDocument, cs2: DesignDocument) -> DesignDocument:
    """K4+e GDD of type ``g^n`` plus a CS of type ``(g^2:s)`` on every pair of
    groups (one shared stem) gives a CS of type ``(g^n:s)``."""
    if gdd.kind != "GDD" or gdd.family != "K4E" or cs2.kind != "CS" or cs2.family != "K4E":
        raise ConstructionError("cs_from_pairs needs a K4E GDD and a K4E CS")
    sizes = {len(g) for g in gdd.groups}
    if len(sizes) != 1:
        raise ConstructionError("GDD groups must have equal size")
    (g,) = sizes
    if len(cs2.groups) != 2 or {len(x) for x in cs2.groups} != {g}:
        raise ConstructionError(f"CS ingredient must have type ({g}^2:s)")
    s = len(cs2.stem)
    stem = list(range(gdd.points, gdd.points + s))
    blocks = list(gdd.blocks)
    n = len(gdd.groups)
    for i in range(n):
        for j in range(i + 1, n):
            perm = _map_runs(cs2.points, [(cs2.groups[0], gdd.groups[i]), (cs2.groups[1], gdd.groups[j]), (cs2.stem, stem)])
            blocks += _place(cs2, perm)
    expected = gdd.block_count + n * (n - 1) // 2 * cs2.block_count
    out = DesignDocument("CS", "K4E", gdd.points + s, gdd.groups, stem, (), blocks)
    return _checked(out, expected)


# -- Construction: filling ------------------------------------------------------------


def _hole_split(ing: DesignDocument, s: int) -> tuple[list[int], list[int]]:
    """(non-hole points, hole points) of an HS ingredient; an S stands in for s < 3."""
    if ing.kind == "HS":
        hole = sorted(ing.hole)
    else:
        hole = list(range(ing.points - s, ing.points))
    rest = [p for p in range(ing.points) if p not in set(hole)]
    return rest, hole


def fill(cs: DesignDocument, supplier: Supplier, last: int | None = None) -> DesignDocument:
    """Fill every ``G_i + stem`` of a K4+e CS with an HS (hole = stem), the
    distinguished group with an S, giving an S(3, K4+e, v)."""
    if cs.kind != "CS" or cs.family != "K4E":
        raise ConstructionError("fill needs a K4E candelabra system")
    s = len(cs.stem)
    last = len(cs.groups) - 1 if last is None else last
    blocks = list(cs.blocks)
    expected = cs.block_count
    for i, G in enumerate(cs.groups):
        g = len(G)
        if i == last:
            spec = IngredientSpec("S", "K4E", g + s)
            ing = _expect(supplier(spec), spec)
            perm = _map_runs(ing.points, [(range(g), G), (range(g, g + s), cs.stem)])
        else:
            spec = IngredientSpec("HS", "K4E", g + s, hole=s)
            ing = _expect(supplier(spec), spec)
            rest, hole = _hole_split(ing, s)
            perm = _map_runs(ing.points, [(rest, G), (hole, cs.stem)])
        blocks += _place(ing, perm)
        expected += ing.block_count
    return _checked(DesignDocument("S", "K4E", cs.points, (), (), (), blocks), expected)


def fill_with_complete(cs: DesignDocument) -> DesignDocument:
    """Close a COMPLETE-family CS into an S design by adding each ``G_i + stem`` as one block."""
    if cs.kind != "CS" or cs.family != "COMPLETE":
        raise ConstructionError("fill_with_complete needs a COMPLETE candelabra system")
    blocks = list(cs.blocks) + [tuple(sorted(G + cs.stem)) for G in cs.groups]
    return _checked(DesignDocument("S", "COMPLETE", cs.points, (), (), (), blocks), len(blocks))


# -- Construction: stem-aware inflation -------------------------------------------------


def inflate_hfc(
    master: DesignDocument,
    b: int,
    r: int,
    supplier: Supplier,
    stem_order: Sequence[int] | None = None,
) -> DesignDocument:
    """Inflate a COMPLETE CS of type ``(g_i^{a_i} : s)`` by ``b`` into a K4+e CS of
    type ``((b g_i)^{a_i} : r + s b - b)`` on ``(v - 1) b + r`` points.

    Blocks through the first stem point are replaced by CS ingredients of type
    ``(b^{k-1} : r)`` sharing one new stem of size ``r``; every other block by a
    GDD of type ``b^k``.
    """
    if master.kind != "CS" or master.family != "COMPLETE":
        raise ConstructionError("inflation needs a COMPLETE candelabra master")
    stem = list(stem_order) if stem_order is not None else sorted(master.stem)
    if not stem:
        raise ConstructionError("inflation needs a nonempty stem")
    if sorted(stem) != sorted(master.stem):
        raise ConstructionError("stem_order must list the master stem")
    x1 = stem[0]
    v, s = master.points, len(stem)
    idx = {p: i for i, p in enumerate(p for p in range(v) if p != x1)}
    cell = lambda p: [idx[p] * b + i for i in range(b)]  # noqa: E731
    new_pts = (v - 1) * b + r
    shared = list(range((v - 1) * b, new_pts))
    new_stem = sum((cell(x) for x in stem[1:]), []) + shared
    assert new_pts == (v - 1) * b + r and len(new_stem) == r + s * b - b
    blocks: list = []
    expected = 0
    for A in master.blocks:
        A = sorted(A)
        k = len(A)
        if x1 in A:
            cells = [p for p in A if p != x1]
            spec = IngredientSpec("CS", "K4E", groups=((b, k - 1),), stem=r)
            ing = _expect(supplier(spec), spec)
            perm = _map_runs(ing.points, [(gr, cell(p)) for gr, p in zip(ing.groups, cells)] + [(ing.stem, shared)])
        else:
            spec = IngredientSpec("GDD", "K4E", groups=((b, k),))
            ing = _expect(supplier(spec), spec)
            perm = _map_runs(ing.points, [(gr, cell(p)) for gr, p in zip(ing.groups, A)])
        blocks += _place(ing, perm)
        expected += ing.block_count
    groups = [sum((cell(p) for p in G), []) for G in master.groups]
    out = DesignDocument("CS", "K4E", new_pts, groups, new_stem, (), blocks)
    return _checked(out, expected)


# -- candelabra systems of type (2^n : 2) ------------------------------------------------


def cs_pair_deletion_from_sqs(sqs: DesignDocument, a: int, b: int) -> DesignDocument:
    """Delete the blocks through ``{a, b}`` from an SQS; their remainders become the groups."""
    if sqs.kind != "S" or sqs.family != "COMPLETE" or any(len(B) != 4 for B in sqs.blocks):
        raise ConstructionError("pair deletion needs an S(3,{4},v)")
    if a == b:
        raise ConstructionError("the deleted pair needs two distinct points")
    if not verify(sqs).valid:
        raise ConstructionError("input is not a valid S(3,{4},v)")
    through = [B for B in sqs.blocks if a in B and b in B]
    rest = [B for B in sqs.blocks if not (a in B and b in B)]
    groups = [tuple(sorted(set(B) - {a, b})) for B in through]
    out = DesignDocument("CS", "COMPLETE", sqs.points, groups, (a, b), (), rest)
    return _checked(out, len(sqs.blocks) - len(through))


def cs_pair_deletion_from_h(hdesign: DesignDocument, c: int, d: int) -> DesignDocument:
    """Same deletion on an H design of type ``6^m``; the old groups are kept as 6-point blocks."""
    if hdesign.kind != "CS" or hdesign.family != "COMPLETE" or hdesign.stem:
        raise ConstructionError("need a COMPLETE CS of type (6^m:0)")
    if {len(g) for g in hdesign.groups} != {6} or any(len(B) != 4 for B in hdesign.blocks):
        raise ConstructionError("need an H design with groups of size 6 and blocks of size 4")
    gi = {p: i for i, g in enumerate(hdesign.groups) for p in g}
    if c == d or gi[c] == gi[d]:
        raise ConstructionError("c and d must lie in distinct groups")
    through = [B for B in hdesign.blocks if c in B and d in B]
    rest = [B for B in hdesign.blocks if not (c in B and d in B)]
    groups = [tuple(sorted(set(B) - {c, d})) for B in through]
    blocks = rest + [tuple(g) for g in hdesign.groups]
    out = DesignDocument("CS", "COMPLETE", hdesign.points, groups, (c, d), (), blocks)
    return _checked(out, len(blocks))


def cs_trivial(bd: DesignDocument, x0: int) -> DesignDocument:
    """Read an S(3, K, u+1) as a CS of type ``(1^u : 1)`` with stem ``{x0}``."""
    if bd.kind != "S" or bd.family != "COMPLETE":
        raise ConstructionError("need a COMPLETE S design")
    if bd.points % 2:
        raise ConstructionError("the trivial candelabra is taken from an even-order design")
    groups = [(p,) for p in range(bd.points) if p != x0]
    out = DesignDocument("CS", "COMPLETE", bd.points, groups, (x0,), (), bd.blocks)
    return _checked(out, bd.block_count)


def cs_2n2(n: int, supplier: Supplier) -> DesignDocument:
    """CS(3, {4,6}, 2n+2) of type ``(2^n : 2)`` for ``n >= 3``."""
    if n < 3:
        raise ConstructionError("type (2^n:2) needs n >= 3")
    if n % 3 in (0, 1):
        spec = IngredientSpec("S", "COMPLETE", 2 * n + 2, sizes=(4,))
        return cs_pair_deletion_from_sqs(supplier(spec), 0, 1)
    spec = IngredientSpec("CS", "COMPLETE", groups=((6, (n + 1) // 3),), sizes=(4,))
    h = supplier(spec)
    return cs_pair_deletion_from_h(h, h.groups[0][0], h.groups[1][0])


def bd46_even(v: int, supplier: Supplier) -> DesignDocument:
    """An S(3, {4,6}, v) for even ``v >= 4``."""
    if v % 2 or v < 4:
        raise ConstructionError("S(3,{4,6},v) is built for even v >= 4")
    if v in (4, 6):
        return _checked(DesignDocument("S", "COMPLETE", v, blocks=[tuple(range(v))]), 1)
    return fill_with_complete(cs_2n2((v - 2) // 2, supplier))
