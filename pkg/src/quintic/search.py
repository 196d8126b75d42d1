"""Exact cover search.

Two interchangeable solvers implement the same deterministic search:
a dancing-links kernel over flat arrays (compiled with numba when enabled)
and a dict-of-sets Algorithm X in plain Python.  Both choose the column with
fewest remaining candidates (lowest index on ties) and try its candidates in
ascending order, so they visit the same tree and report the same node count.
A node is one call of the recursive search, root included.
"""
from __future__ import annotations

import hashlib
import json
import time
from dataclasses import dataclass, field
from itertools import combinations
from math import comb
from typing import Hashable, Sequence

import numpy as np

from . import _accel
from ._accel import njit
from .core import (
    K4E_DEGREES,
    K4E_EDGES,
    DesignDocument,
    DesignError,
    IngredientSpec,
    MalformedInput,
    canonical_blocks,
    encode_sorted,
)
from .verify import triple_masks, verify

DEFAULT_BUDGET = 20_000_000


class BudgetExhausted(DesignError):
    def __init__(self, what: str, nodes: int):
        self.nodes = nodes
        super().__init__(f"node budget exhausted after {nodes} nodes searching {what}")


@dataclass(frozen=True)
class CoverInstance:
    universe: Sequence[Hashable]
    candidates: Sequence[tuple[Hashable, Sequence[Hashable]]]

    def compile(self) -> tuple[list[list[int]], int]:
        col = {e: i for i, e in enumerate(self.universe)}
        if len(col) != len(self.universe):
            raise MalformedInput("universe elements must be distinct")
        rows = []
        for cid, elems in self.candidates:
            if not elems:
                raise MalformedInput(f"candidate {cid!r} covers nothing")
            try:
                idx = sorted(col[e] for e in elems)
            except KeyError as exc:
                raise MalformedInput(f"candidate {cid!r} covers {exc.args[0]!r} outside the universe") from None
            if len(set(idx)) != len(idx):
                raise MalformedInput(f"candidate {cid!r} repeats an element")
            rows.append(idx)
        return rows, len(col)


@dataclass
class CoverResult:
    solutions: list[list[Hashable]]
    count: int
    nodes: int
    exhausted: bool  # True when the whole search tree was traversed
    backend: str = ""


# -- dancing links kernel ------------------------------------------------------


@njit
def _dlx(row_ptr, row_cols, ncols, limit, budget, store):
    nnz = row_cols.shape[0]
    N = ncols + 1 + nnz
    L = np.empty(N, np.int64)
    R = np.empty(N, np.int64)
    U = np.empty(N, np.int64)
    D = np.empty(N, np.int64)
    C = np.empty(N, np.int64)
    ROW = np.full(N, -1, np.int64)
    S = np.zeros(ncols + 1, np.int64)
    for h in range(ncols + 1):
        L[h] = h - 1 if h > 0 else ncols
        R[h] = h + 1 if h < ncols else 0
        U[h] = h
        D[h] = h
        C[h] = h
    node = ncols + 1
    nrows = row_ptr.shape[0] - 1
    for r in range(nrows):
        first = node
        for idx in range(row_ptr[r], row_ptr[r + 1]):
            c = row_cols[idx] + 1
            C[node] = c
            ROW[node] = r
            U[node] = U[c]
            D[node] = c
            D[U[c]] = node
            U[c] = node
            S[c] += 1
            if node == first:
                L[node] = node
                R[node] = node
            else:
                L[node] = node - 1
                R[node - 1] = node
                R[node] = first
                L[first] = node
            node += 1

    sols = np.full((max(store, 1), ncols + 1), -1, np.int64)
    O = np.empty(ncols + 1, np.int64)
    k = 0
    count = 0
    nodes = 0
    exhausted = True
    entering = True
    while True:
        if entering:
            nodes += 1
            if budget >= 0 and nodes > budget:
                exhausted = False
                break
            if R[0] == 0:
                if count < store:
                    for i in range(k):
                        sols[count, i] = ROW[O[i]]
                count += 1
                if limit >= 0 and count >= limit:
                    exhausted = False
                    break
                entering = False
                continue
            c = R[0]
            best = S[c]
            j = R[c]
            while j != 0:
                if S[j] < best:
                    best = S[j]
                    c = j
                j = R[j]
            # cover c
            R[L[c]] = R[c]
            L[R[c]] = L[c]
            i = D[c]
            while i != c:
                j = R[i]
                while j != i:
                    U[D[j]] = U[j]
                    D[U[j]] = D[j]
                    S[C[j]] -= 1
                    j = R[j]
                i = D[i]
            r = D[c]
        else:
            if k == 0:
                break
            k -= 1
            r = O[k]
            c = C[r]
            j = L[r]
            while j != r:
                cc = C[j]
                i = U[cc]
                while i != cc:
                    jj = L[i]
                    while jj != i:
                        S[C[jj]] += 1
                        U[D[jj]] = jj
                        D[U[jj]] = jj
                        jj = L[jj]
                    i = U[i]
                R[L[cc]] = cc
                L[R[cc]] = cc
                j = L[j]
            r = D[r]
        if r == c:
            # uncover c and keep backtracking
            i = U[c]
            while i != c:
                jj = L[i]
                while jj != i:
                    S[C[jj]] += 1
                    U[D[jj]] = jj
                    D[U[jj]] = jj
                    jj = L[jj]
                i = U[i]
            R[L[c]] = c
            L[R[c]] = c
            entering = False
            continue
        O[k] = r
        j = R[r]
        while j != r:
            cc = C[j]
            R[L[cc]] = R[cc]
            L[R[cc]] = L[cc]
            i = D[cc]
            while i != cc:
                jj = R[i]
                while jj != i:
                    U[D[jj]] = U[jj]
                    D[U[jj]] = D[jj]
                    S[C[jj]] -= 1
                    jj = R[jj]
                i = D[i]
            j = R[j]
        k += 1
        entering = True
    return count, nodes, exhausted, sols


class _Stop(Exception):
    pass


def _algorithm_x(rows: list[list[int]], ncols: int, limit: int, budget: int, store: int):
    X: dict[int, set[int]] = {c: set() for c in range(ncols)}
    for r, cols in enumerate(rows):
        for c in cols:
            X[c].add(r)
    sols: list[list[int]] = []
    partial: list[int] = []
    state = {"count": 0, "nodes": 0}

    def select(r):
        saved = []
        for j in rows[r]:
            for i in X[j]:
                for k in rows[i]:
                    if k != j:
                        X[k].discard(i)
            saved.append(X.pop(j))
        return saved

    def deselect(r, saved):
        for j in reversed(rows[r]):
            X[j] = saved.pop()
            for i in X[j]:
                for k in rows[i]:
                    if k != j:
                        X[k].add(i)

    def search():
        state["nodes"] += 1
        if 0 <= budget < state["nodes"]:
            raise _Stop
        if not X:
            if state["count"] < store:
                sols.append(list(partial))
            state["count"] += 1
            if 0 <= limit <= state["count"]:
                raise _Stop
            return
        c = min(X, key=lambda j: (len(X[j]), j))
        for r in sorted(X[c]):
            partial.append(r)
            saved = select(r)
            search()
            deselect(r, saved)
            partial.pop()

    exhausted = True
    try:
        search()
    except _Stop:
        exhausted = False
    return state["count"], state["nodes"], exhausted, sols


def exact_cover(
    instance: CoverInstance,
    limit: int | None = None,
    budget: int | None = None,
    store: int | None = None,
    backend: str | None = None,
) -> CoverResult:
    """Enumerate exact covers; stops after ``limit`` solutions or ``budget`` nodes.

    Up to ``store`` solutions (default: ``limit``, or 1000) are returned as lists
    of candidate ids in ascending candidate order.
    """
    rows, ncols = instance.compile()
    lim = -1 if limit is None else int(limit)
    bud = -1 if budget is None else int(budget)
    keep = store if store is not None else (limit if limit is not None else 1000)
    backend = backend or _accel.backend()
    if backend == "numba" and _accel.USE_NUMBA:
        row_ptr = np.zeros(len(rows) + 1, np.int64)
        row_ptr[1:] = np.cumsum([len(r) for r in rows])
        row_cols = np.array([c for r in rows for c in r], dtype=np.int64)
        count, nodes, exhausted, arr = _dlx(row_ptr, row_cols, ncols, lim, bud, int(keep))
        raw = [[int(x) for x in arr[i] if x >= 0] for i in range(min(int(count), int(keep)))]
        used = "numba"
    else:
        count, nodes, exhausted, raw = _algorithm_x(rows, ncols, lim, bud, int(keep))
        used = "python"
    ids = [cid for cid, _ in instance.candidates]
    solutions = [[ids[r] for r in sorted(sol)] for sol in raw]
    return CoverResult(solutions, int(count), int(nodes), bool(exhausted), used)


# -- candidate generation ----------------------------------------------------------


def k4e_copies(points: Sequence[int]) -> np.ndarray:
    """Every labelled copy of K4+e on ``points``, canonical, in a fixed order.

    Order: 4-subset ``Q`` lexicographically, then the pair ``{z,u}`` inside
    ``Q``, then the tail outside ``Q``.
    """
    pts = list(points)
    out = []
    for quad in combinations(pts, 4):
        rest = [p for p in pts if p not in quad]
        for zu in combinations(quad, 2):
            xy = [p for p in quad if p not in zu]
            for w in rest:
                out.append((xy[0], xy[1], zu[0], zu[1], w))
    return canonical_blocks(np.array(out, dtype=np.int64).reshape(-1, 5))


def _k4e_edge_codes(blocks: np.ndarray) -> np.ndarray:
    return np.stack([encode_sorted(blocks[:, list(e)]) for e in K4E_EDGES], axis=1)


def design_instance(spec: IngredientSpec) -> tuple[CoverInstance, DesignDocument]:
    """Exact cover instance whose solutions are the designs described by ``spec``."""
    layout = spec.layout()
    req, forb = triple_masks(layout)
    universe = np.nonzero(req)[0]
    pts = range(spec.points)
    cands = []
    if spec.family == "K4E":
        blocks = k4e_copies(pts) if spec.points >= 5 else np.zeros((0, 5), np.int64)
        if len(blocks):
            codes = _k4e_edge_codes(blocks)
            ok = req[codes].all(axis=1)
            for b, c in zip(blocks[ok].tolist(), codes[ok].tolist()):
                cands.append((tuple(b), c))
    else:
        for k in spec.sizes:
            if k > spec.points or k < 3:
                continue
            subsets = np.array(list(combinations(pts, k)), dtype=np.int64)
            tri = list(combinations(range(k), 3))
            codes = np.stack([encode_sorted(subsets[:, list(t)]) for t in tri], axis=1)
            ok = req[codes].all(axis=1)
            for b, c in zip(subsets[ok].tolist(), codes[ok].tolist()):
                cands.append((tuple(b), c))
    return CoverInstance([int(u) for u in universe], cands), layout


def find_design(
    spec: IngredientSpec,
    budget: int | None = DEFAULT_BUDGET,
    backend: str | None = None,
) -> DesignDocument | None:
    """First design matching ``spec`` in search order.

    Returns ``None`` when the search space was exhausted without a solution and
    raises :class:`BudgetExhausted` when the node budget ran out first.
    """
    if spec.kind in ("S", "HS") and spec.family == "COMPLETE" and spec.points in spec.sizes and spec.hole < 3:
        return DesignDocument("S", "COMPLETE", spec.points, blocks=[tuple(range(spec.points))])
    instance, layout = design_instance(spec)
    res = exact_cover(instance, limit=1, budget=budget, backend=backend)
    if not res.solutions:
        if res.exhausted:
            return None
        raise BudgetExhausted(str(spec), res.nodes)
    doc = DesignDocument(
        layout.kind, layout.family, layout.points, layout.groups, layout.stem, layout.hole, res.solutions[0]
    ).canonical()
    rep = verify(doc)
    assert rep.valid, rep.render_text()
    return doc


# -- cyclic (base block) search ------------------------------------------------------


def cyclic_instance(n: int) -> CoverInstance:
    """Base-block search for an S(3, K4+e, n) invariant under ``x -> x+1 mod n``.

    Columns are orbits of triples, candidates are orbits of blocks (one
    canonical representative each) whose five edges lie in five distinct full
    orbits.  A short triple orbit (3 | n) leaves a column no block can cover.
    """
    tri = np.array(list(combinations(range(n), 3)), dtype=np.int64)
    shifts = (tri[None, :, :] + np.arange(n)[:, None, None]) % n
    orbit_code = encode_sorted(shifts.reshape(-1, 3)).reshape(n, -1).min(axis=0)
    rep_of = dict(zip(encode_sorted(tri).tolist(), orbit_code.tolist()))
    universe = sorted(set(orbit_code.tolist()))
    blocks = k4e_copies(range(n))
    shifted = canonical_blocks(((blocks[None, :, :] + np.arange(n)[:, None, None]) % n).reshape(-1, 5))
    shifted = shifted.reshape(n, -1, 5)
    # representative = lexicographically smallest canonical shift
    keys = shifted[..., 0] * n**4 + shifted[..., 1] * n**3 + shifted[..., 2] * n**2 + shifted[..., 3] * n + shifted[..., 4]
    own = keys[0]
    is_rep = own == keys.min(axis=0)
    cands = []
    for b in blocks[is_rep].tolist():
        orbits = [rep_of[int(c)] for c in _k4e_edge_codes(np.array([b]))[0]]
        if len(set(orbits)) == 5:
            cands.append((tuple(b), orbits))
    return CoverInstance(universe, cands)


def find_cyclic_base_blocks(n: int, limit: int | None = 1, budget: int | None = DEFAULT_BUDGET) -> CoverResult:
    return exact_cover(cyclic_instance(n), limit=limit, budget=budget)


# -- nonexistence ---------------------------------------------------------------------


def feasible_profiles(v: int) -> list[tuple[int, int, int]]:
    """(d1, d3, d4) with d1 + 3 d3 + 4 d4 = (v-1)(v-2)/2 and d1 + d3 + d4 <= C(v,3)/5."""
    target = (v - 1) * (v - 2) // 2
    nblocks = comb(v, 3) // 5
    out = []
    for d4 in range(target // 4 + 1):
        for d3 in range((target - 4 * d4) // 3 + 1):
            d1 = target - 4 * d4 - 3 * d3
            if d1 + d3 + d4 <= nblocks:
                out.append((d1, d3, d4))
    return out


@dataclass
class NonexistenceCertificate:
    v: int
    candidate_count: int
    nodes_explored: int
    solutions_found: int
    ordering_fingerprint: str
    blocks_required: int
    exhausted: bool
    prefilter: bool
    backend: str
    wall_time: float = field(default=0.0, compare=False)

    def to_json(self) -> dict:
        return {
            "v": self.v,
            "candidateCount": self.candidate_count,
            "nodesExplored": self.nodes_explored,
            "solutionsFound": self.solutions_found,
            "orderingFingerprint": self.ordering_fingerprint,
            "blocksRequired": self.blocks_required,
            "exhausted": self.exhausted,
            "prefilter": self.prefilter,
            "backend": self.backend,
            "wallTime": round(self.wall_time, 6),
        }


def _fingerprint(instance: CoverInstance) -> str:
    payload = json.dumps(
        {"universe": list(instance.universe), "candidates": [list(c) for c, _ in instance.candidates]},
        separators=(",", ":"),
    )
    return hashlib.sha256(payload.encode()).hexdigest()


def prove_nonexistence(v: int, prefilter: bool = False, backend: str | None = None) -> NonexistenceCertificate:
    """Exhaustively search all K4+e covers of K_v^(3), ``v`` in {5, 6}.

    With ``prefilter`` the counting identity removes candidates that would give
    some vertex a degree no feasible profile uses; the traversal alone decides.
    """
    if v not in (5, 6):
        raise MalformedInput("nonexistence certificates are produced for v = 5 and v = 6 only")
    t0 = time.perf_counter()
    blocks = k4e_copies(range(v))
    candidate_count = len(blocks)
    if prefilter:
        usable = {deg for prof in feasible_profiles(v) for deg, n in zip((1, 3, 4), prof) if n}
        if not all(deg in usable for deg in K4E_DEGREES):
            blocks = blocks[:0]
    codes = _k4e_edge_codes(blocks) if len(blocks) else np.zeros((0, 5), np.int64)
    instance = CoverInstance(list(range(comb(v, 3))), [(tuple(b), c) for b, c in zip(blocks.tolist(), codes.tolist())])
    res = exact_cover(instance, limit=None, budget=None, store=1, backend=backend)
    if not res.exhausted:
        raise DesignError("nonexistence search did not complete")
    return NonexistenceCertificate(
        v=v,
        candidate_count=candidate_count,
        nodes_explored=res.nodes,
        solutions_found=res.count,
        ordering_fingerprint=_fingerprint(instance),
        blocks_required=comb(v, 3) // 5,
        exhausted=res.exhausted,
        prefilter=prefilter,
        backend=res.backend,
        wall_time=time.perf_counter() - t0,
    )
