"""Coverage oracle, admissibility and per-vertex degree profiles.

Coverage is counted in a dense table indexed by triple rank, so a report is
exact and independent of block order.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import reduce
from itertools import combinations
from math import comb, gcd
from typing import NamedTuple

import numpy as np

from ._accel import njit
from .core import K4E_DEGREES, K4E_EDGES, DesignDocument, MalformedInput, Triple, all_triples, encode_sorted

# -- kernels -----------------------------------------------------------------


@njit
def _count_k4e_numba(blocks, counts):
    for i in range(blocks.shape[0]):
        for e in range(5):
            if e == 0:
                p, q, r = blocks[i, 0], blocks[i, 1], blocks[i, 2]
            elif e == 1:
                p, q, r = blocks[i, 0], blocks[i, 1], blocks[i, 3]
            elif e == 2:
                p, q, r = blocks[i, 0], blocks[i, 2], blocks[i, 3]
            elif e == 3:
                p, q, r = blocks[i, 1], blocks[i, 2], blocks[i, 3]
            else:
                p, q, r = blocks[i, 2], blocks[i, 3], blocks[i, 4]
            if p > q:
                p, q = q, p
            if q > r:
                q, r = r, q
            if p > q:
                p, q = q, p
            counts[r * (r - 1) * (r - 2) // 6 + q * (q - 1) // 2 + p] += 1
    return counts


def _count_k4e_numpy(blocks, counts):
    if len(blocks):
        codes = np.concatenate([encode_sorted(blocks[:, list(e)]) for e in K4E_EDGES])
        counts += np.bincount(codes, minlength=len(counts))
    return counts


def count_k4e_edges(blocks: np.ndarray, n_codes: int, jobs: int = 1) -> np.ndarray:
    """Edge multiplicities of an ``(n, 5)`` block array, indexed by triple rank."""
    from . import _accel

    kernel = _count_k4e_numba if _accel.USE_NUMBA else _count_k4e_numpy
    blocks = np.ascontiguousarray(blocks, dtype=np.int64)
    if jobs <= 1 or len(blocks) < 4096:
        return kernel(blocks, np.zeros(n_codes, dtype=np.int64))
    chunks = np.array_split(blocks, jobs)
    with ThreadPoolExecutor(jobs) as pool:
        parts = list(pool.map(lambda c: kernel(np.ascontiguousarray(c), np.zeros(n_codes, dtype=np.int64)), chunks))
    return reduce(np.add, parts)


def count_complete_edges(blocks, n_codes: int) -> np.ndarray:
    codes = [encode_sorted(np.array(list(combinations(b, 3)))) for b in blocks if len(b) >= 3]
    if not codes:
        return np.zeros(n_codes, dtype=np.int64)
    return np.bincount(np.concatenate(codes), minlength=n_codes).astype(np.int64)


# -- required / forbidden triples ---------------------------------------------


class TripleSets(NamedTuple):
    required: np.ndarray  # sorted triple ranks
    forbidden: np.ndarray


def _labels(d: DesignDocument) -> np.ndarray:
    lab = np.full(d.points, -1, dtype=np.int64)
    for gi, g in enumerate(d.groups):
        lab[list(g)] = gi
    return lab


def triple_masks(d: DesignDocument) -> tuple[np.ndarray, np.ndarray]:
    """Boolean (required, forbidden) masks over all triple ranks of ``d``."""
    d.validate(blocks=False)
    tri = all_triples(d.points)
    n = len(tri)
    if d.kind == "S":
        return np.ones(n, bool), np.zeros(n, bool)
    if d.kind == "HS":
        hole = np.zeros(d.points, bool)
        hole[list(d.hole)] = True
        forb = hole[tri].all(axis=1) if len(d.hole) >= 3 else np.zeros(n, bool)
        return ~forb, forb
    lab = _labels(d)[tri]
    la, lb, lc = lab[:, 0], lab[:, 1], lab[:, 2]
    if d.kind == "GDD":
        req = (la != lb) & (la != lc) & (lb != lc)
        return req, ~req
    # CS: a triple is excluded iff its non-stem points all share one group
    split = lambda x, y: (x >= 0) & (y >= 0) & (x != y)  # noqa: E731
    req = split(la, lb) | split(la, lc) | split(lb, lc)
    return req, ~req


def required_triples(d: DesignDocument) -> TripleSets:
    req, forb = triple_masks(d)
    return TripleSets(np.nonzero(req)[0], np.nonzero(forb)[0])


# -- verification ---------------------------------------------------------------


@dataclass
class VerificationReport:
    valid: bool
    block_count: int
    required_count: int
    uncovered: list[Triple] = field(default_factory=list)
    multiply_covered: list[tuple[Triple, int]] = field(default_factory=list)
    forbidden_covered: list[Triple] = field(default_factory=list)
    shape_errors: list[int] = field(default_factory=list)

    def to_json(self, limit: int | None = 20) -> dict:
        cut = (lambda xs: xs[:limit]) if limit is not None else (lambda xs: xs)
        return {
            "valid": self.valid,
            "blockCount": self.block_count,
            "requiredTripleCount": self.required_count,
            "uncoveredCount": len(self.uncovered),
            "multiplyCoveredCount": len(self.multiply_covered),
            "forbiddenCoveredCount": len(self.forbidden_covered),
            "shapeErrorCount": len(self.shape_errors),
            "uncovered": [list(t) for t in cut(self.uncovered)],
            "multiplyCovered": [[list(t), c] for t, c in cut(self.multiply_covered)],
            "forbiddenCovered": [list(t) for t in cut(self.forbidden_covered)],
            "shapeErrors": cut(self.shape_errors),
        }

    def render_text(self, limit: int = 20) -> str:
        lines = [
            f"{'VALID' if self.valid else 'INVALID'}: {self.block_count} blocks, "
            f"{self.required_count} required triples"
        ]
        for title, items in (
            ("uncovered", [str(t) for t in self.uncovered]),
            ("multiply covered", [f"{t} x{c}" for t, c in self.multiply_covered]),
            ("forbidden covered", [str(t) for t in self.forbidden_covered]),
            ("malformed blocks", [f"#{i}" for i in self.shape_errors]),
        ):
            if items:
                more = f" (first {limit})" if len(items) > limit else ""
                lines.append(f"  {title}: {len(items)}{more}")
                lines.append("    " + " ".join(items[:limit]))
        return "\n".join(lines)


def _shape_ok(b, d: DesignDocument) -> bool:
    if d.family == "K4E" and len(b) != 5:
        return False
    if d.family == "COMPLETE" and len(b) < 3:
        return False
    return len(set(b)) == len(b) and all(0 <= p < d.points for p in b)


def verify(d: DesignDocument, jobs: int = 1) -> VerificationReport:
    """Check exact coverage of the required triples and absence of forbidden ones."""
    req, forb = triple_masks(d)
    shape_errors = [i for i, b in enumerate(d.blocks) if not _shape_ok(b, d)]
    if shape_errors:
        skip = set(shape_errors)
        good = [b for i, b in enumerate(d.blocks) if i not in skip]
    else:
        good = d.blocks
    n = len(req)
    if d.family == "K4E":
        arr = np.asarray(good, dtype=np.int64).reshape(-1, 5)
        counts = count_k4e_edges(arr, n, jobs)
    else:
        counts = count_complete_edges(good, n)
    uncovered = np.nonzero(req & (counts == 0))[0]
    multi = np.nonzero(counts > 1)[0]
    bad = np.nonzero(forb & (counts > 0))[0]
    tri = Triple.from_code
    return VerificationReport(
        valid=not (len(uncovered) or len(multi) or len(bad) or shape_errors),
        block_count=len(d.blocks),
        required_count=int(req.sum()),
        uncovered=[tri(int(c)) for c in uncovered],
        multiply_covered=[(tri(int(c)), int(counts[c])) for c in multi],
        forbidden_covered=[tri(int(c)) for c in bad],
        shape_errors=shape_errors,
    )


# -- admissibility --------------------------------------------------------------


def template_gcds(edges=K4E_EDGES) -> tuple[int, int, int]:
    """(d0, d1, d2): gcds of edge count, vertex degrees and pair degrees of a template."""
    verts = sorted({p for e in edges for p in e})
    d0 = len(edges)
    d1 = reduce(gcd, (sum(x in e for e in edges) for x in verts))
    d2 = reduce(gcd, (sum(x in e and y in e for e in edges) for x, y in combinations(verts, 2)))
    return d0, d1, d2


D0, D1, D2 = template_gcds()
MIN_ORDER = len({p for e in K4E_EDGES for p in e})


@dataclass(frozen=True)
class AdmissibilityReport:
    v: int
    d0: int
    d1: int
    d2: int
    passes: dict
    admissible: bool
    exists_per_theorem: bool

    def to_json(self) -> dict:
        return {
            "v": self.v,
            "d0": self.d0,
            "d1": self.d1,
            "d2": self.d2,
            "passes": self.passes,
            "admissible": self.admissible,
            "existsPerTheorem": self.exists_per_theorem,
        }


def admissible(v: int) -> AdmissibilityReport:
    if v < 0:
        raise MalformedInput("v must be nonnegative")
    passes = {
        "order": v >= MIN_ORDER,
        "triples": comb(v, 3) % D0 == 0,
        "pairs": comb(v - 1, 2) % D1 == 0 if v >= 1 else True,
        "points": (v - 2) % D2 == 0 if v >= 2 else True,
    }
    ok = all(passes.values())
    return AdmissibilityReport(v, D0, D1, D2, passes, ok, ok and v >= 7)


def admissible_mask(vs: np.ndarray) -> np.ndarray:
    """Vectorised :func:`admissible` (the ``admissible`` flag only); exact for ``v <= 2 * 10**6``."""
    v = np.asarray(vs, dtype=np.int64)
    c3 = v * (v - 1) * (v - 2) // 6
    c2 = (v - 1) * (v - 2) // 2
    return (v >= MIN_ORDER) & (c3 % D0 == 0) & (c2 % D1 == 0) & ((v - 2) % D2 == 0)


# -- degree profiles -------------------------------------------------------------


def degree_profile(d: DesignDocument, x: int) -> tuple[int, int, int]:
    """Numbers of blocks in which ``x`` has degree 1, 3 and 4."""
    if d.family != "K4E":
        raise MalformedInput("degree profiles are defined for K4E designs")
    if not 0 <= x < d.points:
        raise MalformedInput(f"point {x} out of range")
    prof = {1: 0, 3: 0, 4: 0}
    for b in d.blocks:
        if x in b:
            prof[K4E_DEGREES[b.index(x)]] += 1
    return prof[1], prof[3], prof[4]


def degree_profiles(d: DesignDocument) -> np.ndarray:
    """``(v, 3)`` array of (d1, d3, d4) for every point."""
    out = np.zeros((d.points, 3), dtype=np.int64)
    arr = d.block_array()
    col = {1: 0, 3: 1, 4: 2}
    for pos, deg in enumerate(K4E_DEGREES):
        np.add.at(out[:, col[deg]], arr[:, pos], 1)
    return out
