"""Points, triples, K4+e blocks and design documents.

Points are dense integers ``0..v-1``.  A block of the K4+e family is the
5-tuple ``(x, y, z, u, w)`` whose edges are ``xyz, xyu, xzu, yzu, zuw``; the
pairs ``{x, y}`` and ``{z, u}`` are interchangeable, so the canonical form
keeps ``x < y`` and ``z < u`` and leaves the tail ``w`` in place.
"""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from itertools import combinations
from math import comb
from typing import Iterable, NamedTuple, Sequence

import numpy as np

KINDS = ("S", "GDD", "CS", "HS")
FAMILIES = ("K4E", "COMPLETE")

# positions of the five edges inside (x, y, z, u, w)
K4E_EDGES = ((0, 1, 2), (0, 1, 3), (0, 2, 3), (1, 2, 3), (2, 3, 4))
# degree of each position inside its own block
K4E_DEGREES = (3, 3, 4, 4, 1)


class DesignError(Exception):
    """Base class for every error raised by this package."""


class MalformedInput(DesignError, ValueError):
    pass


class InvariantViolation(DesignError, ValueError):
    """A document breaks a structural rule.

    ``invariant`` names the rule, ``block`` is the offending block index when
    the problem is local to one block.
    """

    def __init__(self, invariant: str, detail: str = "", block: int | None = None):
        self.invariant = invariant
        self.detail = detail
        self.block = block
        where = f" (block {block})" if block is not None else ""
        super().__init__(f"{invariant}{where}: {detail}" if detail else f"{invariant}{where}")

    def report(self) -> dict:
        return {"invariant": self.invariant, "detail": self.detail, "block": self.block}


# -- triples -----------------------------------------------------------------

class Triple(NamedTuple):
    a: int
    b: int
    c: int

    @classmethod
    def of(cls, p: int, q: int, r: int) -> "Triple":
        a, b, c = sorted((p, q, r))
        if a == b or b == c:
            raise MalformedInput(f"triple with repeated point: {(p, q, r)}")
        if a < 0:
            raise MalformedInput(f"negative point in {(p, q, r)}")
        return cls(a, b, c)

    @property
    def code(self) -> int:
        return encode_triple(self.a, self.b, self.c)

    @classmethod
    def from_code(cls, code: int) -> "Triple":
        return cls(*decode_triple(code))

    def __str__(self) -> str:
        return f"{{{self.a},{self.b},{self.c}}}"


def n_triples(v: int) -> int:
    return comb(v, 3)


def encode_triple(a: int, b: int, c: int) -> int:
    """Combinatorial number system rank of ``a < b < c``.

    The rank does not depend on ``v`` and maps the triples over ``0..v-1``
    bijectively onto ``0..C(v,3)-1``.
    """
    return c * (c - 1) * (c - 2) // 6 + b * (b - 1) // 2 + a


def decode_triple(code: int) -> tuple[int, int, int]:
    if code < 0:
        raise MalformedInput(f"negative triple code {code}")
    c = 2
    while comb(c + 1, 3) <= code:
        c += 1
    code -= comb(c, 3)
    b = 1
    while comb(b + 1, 2) <= code:
        b += 1
    code -= comb(b, 2)
    return code, b, c


def encode_sorted(tri: np.ndarray) -> np.ndarray:
    """Vectorised ranks for an ``(n, 3)`` array of point triples (any order)."""
    t = np.sort(np.asarray(tri, dtype=np.int64), axis=1)
    a, b, c = t[:, 0], t[:, 1], t[:, 2]
    return c * (c - 1) * (c - 2) // 6 + b * (b - 1) // 2 + a


def all_triples(v: int) -> np.ndarray:
    """All triples over ``0..v-1`` as an ``(C(v,3), 3)`` array, row ``i`` has rank ``i``."""
    if v < 3:
        return np.zeros((0, 3), dtype=np.int64)
    out = np.empty((comb(v, 3), 3), dtype=np.int64)
    pos = 0
    for c in range(2, v):
        a, b = np.triu_indices(c, k=1)
        n = len(a)
        out[pos:pos + n, 0] = a
        out[pos:pos + n, 1] = b
        out[pos:pos + n, 2] = c
        pos += n
    order = np.argsort(encode_sorted(out), kind="stable")
    return out[order]


# -- blocks ------------------------------------------------------------------

class Block(NamedTuple):
    x: int
    y: int
    z: int
    u: int
    w: int

    @classmethod
    def of(cls, pts: Sequence[int]) -> "Block":
        if len(pts) != 5:
            raise MalformedInput(f"a K4+e block needs 5 points, got {tuple(pts)}")
        if len(set(pts)) != 5:
            raise MalformedInput(f"repeated point in block {tuple(pts)}")
        return cls(*canonical_block(pts))

    def edges(self) -> frozenset[Triple]:
        return block_edges(self)

    def __str__(self) -> str:
        return "(" + ",".join(map(str, self)) + ")"


def canonical_block(pts: Sequence[int]) -> tuple[int, int, int, int, int]:
    x, y, z, u, w = (int(p) for p in pts)
    if x > y:
        x, y = y, x
    if z > u:
        z, u = u, z
    return x, y, z, u, w


def canonical_blocks(arr: np.ndarray) -> np.ndarray:
    """Row-wise canonical form of an ``(n, 5)`` block array."""
    arr = np.array(arr, dtype=np.int64, copy=True).reshape(-1, 5)
    arr[:, 0:2].sort(axis=1)
    arr[:, 2:4].sort(axis=1)
    return arr


def block_edges(b: Sequence[int]) -> frozenset[Triple]:
    if len(b) != 5:
        raise MalformedInput(f"a K4+e block needs 5 points, got {tuple(b)}")
    return frozenset(Triple.of(b[i], b[j], b[k]) for i, j, k in K4E_EDGES)


def recognize_k4e(edges: Iterable[Sequence[int]]) -> Block | None:
    """Return the canonical block whose edge set is ``edges``, or ``None``."""
    tri = {Triple.of(*e) for e in edges}
    if len(tri) != 5:
        raise MalformedInput(f"expected 5 distinct triples, got {len(tri)}")
    points = sorted({p for t in tri for p in t})
    if len(points) != 5:
        return None
    for quad in combinations(points, 4):
        inside = {Triple(*t) for t in combinations(quad, 3)}
        if not inside <= tri:
            continue
        (extra,) = tri - inside
        shared = set(extra) & set(quad)
        new = set(extra) - set(quad)
        if len(shared) != 2 or len(new) != 1:
            return None
        z, u = sorted(shared)
        x, y = sorted(set(quad) - shared)
        return Block(x, y, z, u, new.pop())
    return None


# -- documents ---------------------------------------------------------------

def _sorted_tuple(xs: Iterable[int]) -> tuple[int, ...]:
    return tuple(sorted(int(x) for x in xs))


@dataclass(frozen=True)
class DesignDocument:
    """An S / GDD / CS / HS design over the points ``0..points-1``.

    ``blocks`` holds 5-tuples for the K4E family and sorted point subsets
    for the COMPLETE family (each subset stands for the complete 3-uniform
    hypergraph on it).
    """

    kind: str
    family: str
    points: int
    groups: tuple[tuple[int, ...], ...] = ()
    stem: tuple[int, ...] = ()
    hole: tuple[int, ...] = ()
    blocks: tuple[tuple[int, ...], ...] = field(default=(), repr=False)

    def __post_init__(self):
        object.__setattr__(self, "points", int(self.points))
        object.__setattr__(self, "groups", tuple(tuple(int(p) for p in g) for g in self.groups))
        object.__setattr__(self, "stem", tuple(int(p) for p in self.stem))
        object.__setattr__(self, "hole", tuple(int(p) for p in self.hole))
        object.__setattr__(self, "blocks", tuple(tuple(int(p) for p in b) for b in self.blocks))

    @property
    def block_count(self) -> int:
        return len(self.blocks)

    def canonical(self) -> "DesignDocument":
        if self.family == "K4E":
            blocks = sorted(canonical_block(b) if len(b) == 5 else tuple(b) for b in self.blocks)
        else:
            blocks = sorted(_sorted_tuple(b) for b in self.blocks)
        return DesignDocument(
            kind=self.kind,
            family=self.family,
            points=self.points,
            groups=tuple(sorted(_sorted_tuple(g) for g in self.groups)),
            stem=_sorted_tuple(self.stem),
            hole=_sorted_tuple(self.hole),
            blocks=tuple(blocks),
        )

    def block_array(self) -> np.ndarray:
        """K4E blocks as an ``(n, 5)`` int64 array."""
        if self.family != "K4E":
            raise MalformedInput("block_array is only defined for the K4E family")
        if not self.blocks:
            return np.zeros((0, 5), dtype=np.int64)
        return np.asarray(self.blocks, dtype=np.int64).reshape(-1, 5)

    def type_vector(self) -> tuple[tuple[int, int], ...]:
        """Group type as sorted ``(size, count)`` pairs."""
        sizes: dict[int, int] = {}
        for g in self.groups:
            sizes[len(g)] = sizes.get(len(g), 0) + 1
        return tuple(sorted(sizes.items()))

    def header(self) -> dict:
        return {
            "kind": self.kind,
            "family": self.family,
            "points": self.points,
            "type": [list(t) for t in self.type_vector()],
            "stem": len(self.stem),
            "hole": len(self.hole),
        }

    def validate(self, blocks: bool = True) -> None:
        """Raise :class:`InvariantViolation` on the first broken structural rule.

        With ``blocks=False`` only the point structure (groups, stem, hole) is
        checked.
        """
        if self.kind not in KINDS:
            raise InvariantViolation("kind", f"unknown kind {self.kind!r}")
        if self.family not in FAMILIES:
            raise InvariantViolation("family", f"unknown family {self.family!r}")
        v = self.points
        if v < 0:
            raise InvariantViolation("points", "negative point count")
        in_range = lambda pts: all(0 <= p < v for p in pts)  # noqa: E731
        seen: set[int] = set()
        for gi, g in enumerate(self.groups):
            if not g:
                raise InvariantViolation("groups-nonempty", f"group {gi} is empty")
            if not in_range(g):
                raise InvariantViolation("groups-range", f"group {gi} has a point outside 0..{v - 1}")
            if len(set(g)) != len(g) or seen & set(g):
                raise InvariantViolation("groups-disjoint", f"group {gi} overlaps another group")
            seen |= set(g)
        if not in_range(self.stem) or len(set(self.stem)) != len(self.stem):
            raise InvariantViolation("stem-range", "stem points must be distinct and in range")
        if seen & set(self.stem):
            raise InvariantViolation("stem-disjoint", "stem intersects a group")
        if not in_range(self.hole) or len(set(self.hole)) != len(self.hole):
            raise InvariantViolation("hole-range", "hole points must be distinct and in range")
        if self.kind in ("GDD", "CS"):
            if seen | set(self.stem) != set(range(v)):
                raise InvariantViolation("groups-partition", "groups and stem must cover every point")
            if self.kind == "GDD" and self.stem:
                raise InvariantViolation("gdd-stem", "a GDD has no stem")
        elif self.groups or self.stem:
            raise InvariantViolation("structure", f"kind {self.kind} carries no groups or stem")
        if self.kind != "HS" and self.hole:
            raise InvariantViolation("structure", f"kind {self.kind} carries no hole")
        if not blocks:
            return
        for bi, b in enumerate(self.blocks):
            if self.family == "K4E" and len(b) != 5:
                raise InvariantViolation("block-arity", f"K4E block has {len(b)} points", bi)
            if self.family == "COMPLETE" and len(b) < 3:
                raise InvariantViolation("block-arity", "COMPLETE block needs at least 3 points", bi)
            if len(set(b)) != len(b):
                raise InvariantViolation("block-distinct", f"repeated point in {b}", bi)
            if not in_range(b):
                raise InvariantViolation("block-range", f"point outside 0..{v - 1} in {b}", bi)


def serialize(d: DesignDocument) -> bytes:
    """Canonical JSON encoding; one block per line."""
    d = d.canonical()
    d.validate()
    comp = lambda x: json.dumps(x, separators=(",", ":"))  # noqa: E731
    head = (
        f'{{"kind":{comp(d.kind)},"family":{comp(d.family)},"points":{d.points},'
        f'"groups":{comp([list(g) for g in d.groups])},"stem":{comp(list(d.stem))},'
        f'"hole":{comp(list(d.hole))},"blocks":['
    )
    body = ",\n".join(comp(list(b)) for b in d.blocks)
    return (head + ("\n" + body + "\n" if body else "") + "]}\n").encode("utf-8")


def deserialize(data: bytes | str, strict: bool = True) -> DesignDocument:
    """Parse a design file.  With ``strict=False`` malformed blocks are kept
    (for the verifier to report) and only the point structure is checked."""
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    try:
        raw = json.loads(data)
    except json.JSONDecodeError as exc:
        raise InvariantViolation("json", str(exc)) from None
    if not isinstance(raw, dict):
        raise InvariantViolation("json", "top level must be an object")
    for key in ("kind", "family", "points", "blocks"):
        if key not in raw:
            raise InvariantViolation("missing-field", key)

    def ints(xs, what):
        if not isinstance(xs, list) or not all(isinstance(p, int) and not isinstance(p, bool) for p in xs):
            raise InvariantViolation("integers", f"{what} must be a list of integers")
        return xs

    if not isinstance(raw["points"], int):
        raise InvariantViolation("integers", "points must be an integer")
    groups = raw.get("groups", [])
    if not isinstance(groups, list):
        raise InvariantViolation("integers", "groups must be a list")
    blocks = raw["blocks"]
    if not isinstance(blocks, list):
        raise InvariantViolation("integers", "blocks must be a list")
    doc = DesignDocument(
        kind=raw["kind"],
        family=raw["family"],
        points=raw["points"],
        groups=[ints(g, "group") for g in groups],
        stem=ints(raw.get("stem", []), "stem"),
        hole=ints(raw.get("hole", []), "hole"),
        blocks=[ints(b, f"block {i}") for i, b in enumerate(blocks)],
    )
    doc.validate(blocks=strict)
    return doc.canonical()


def relabel(d: DesignDocument, perm: Sequence[int] | np.ndarray, points: int | None = None) -> DesignDocument:
    """Apply the point map ``p -> perm[p]`` to every structural field and block."""
    perm = np.asarray(perm, dtype=np.int64)
    m = lambda pts: tuple(int(perm[p]) for p in pts)  # noqa: E731
    if d.family == "K4E" and d.blocks:
        blocks = [tuple(r) for r in canonical_blocks(perm[d.block_array()]).tolist()]
    else:
        blocks = [tuple(sorted(m(b))) for b in d.blocks]
    return DesignDocument(
        kind=d.kind,
        family=d.family,
        points=d.points if points is None else points,
        groups=[m(g) for g in d.groups],
        stem=m(d.stem),
        hole=m(d.hole),
        blocks=blocks,
    )


# -- ingredient specifications -------------------------------------------------

@dataclass(frozen=True)
class IngredientSpec:
    """Canonical key for an auxiliary design.

    ``groups`` is the type vector as sorted ``(size, count)`` pairs, ``sizes``
    the allowed block orders for the COMPLETE family (empty for K4E).
    """

    kind: str
    family: str = "K4E"
    points: int = 0
    groups: tuple[tuple[int, int], ...] = ()
    stem: int = 0
    hole: int = 0
    sizes: tuple[int, ...] = ()

    def __post_init__(self):
        merged: dict[int, int] = {}
        for g, c in self.groups:
            if c:
                merged[int(g)] = merged.get(int(g), 0) + int(c)
        object.__setattr__(self, "groups", tuple(sorted(merged.items())))
        object.__setattr__(self, "sizes", tuple(sorted(set(int(k) for k in self.sizes))))
        if self.kind in ("GDD", "CS"):
            pts = sum(g * c for g, c in self.groups) + self.stem
            if self.points and self.points != pts:
                raise MalformedInput(f"points {self.points} disagrees with type (total {pts})")
            object.__setattr__(self, "points", pts)
        if self.kind == "HS" and self.hole < 3:
            # K_v minus an edgeless K_s is just K_v
            object.__setattr__(self, "kind", "S")
            object.__setattr__(self, "hole", 0)
        if self.kind not in KINDS or self.family not in FAMILIES:
            raise MalformedInput(f"bad spec kind/family {self.kind}/{self.family}")
        if self.family == "COMPLETE" and not self.sizes:
            raise MalformedInput("COMPLETE family specs need block sizes")
        if self.family == "K4E" and self.sizes:
            object.__setattr__(self, "sizes", ())

    @classmethod
    def of(cls, doc: DesignDocument, sizes: Iterable[int] = ()) -> "IngredientSpec":
        if doc.family == "COMPLETE" and not sizes:
            sizes = {len(b) for b in doc.blocks}
        return cls(doc.kind, doc.family, doc.points, doc.type_vector(), len(doc.stem), len(doc.hole), tuple(sizes))

    def to_json(self) -> dict:
        return {
            "kind": self.kind,
            "family": self.family,
            "points": self.points,
            "groups": [list(g) for g in self.groups],
            "stem": self.stem,
            "hole": self.hole,
            "sizes": list(self.sizes),
        }

    @classmethod
    def from_json(cls, obj: dict | str) -> "IngredientSpec":
        if isinstance(obj, str):
            obj = json.loads(obj)
        return cls(
            kind=obj["kind"],
            family=obj.get("family", "K4E"),
            points=obj.get("points", 0),
            groups=tuple(tuple(g) for g in obj.get("groups", ())),
            stem=obj.get("stem", 0),
            hole=obj.get("hole", 0),
            sizes=tuple(obj.get("sizes", ())),
        )

    def key(self) -> str:
        return json.dumps(self.to_json(), separators=(",", ":"))

    def digest(self) -> str:
        return hashlib.sha256(self.key().encode()).hexdigest()[:20]

    def layout(self) -> DesignDocument:
        """Empty document with the standard point layout for this spec.

        Groups occupy consecutive ranges in type order; the stem (CS) or hole
        (HS) is the last block of points.
        """
        groups, pos = [], 0
        for g, c in self.groups:
            for _ in range(c):
                groups.append(tuple(range(pos, pos + g)))
                pos += g
        stem = tuple(range(pos, pos + self.stem)) if self.kind == "CS" else ()
        hole = tuple(range(self.points - self.hole, self.points)) if self.kind == "HS" else ()
        return DesignDocument(self.kind, self.family, self.points, groups, stem, hole, ())

    def __str__(self) -> str:
        fam = "K4E" if self.family == "K4E" else "{" + ",".join(map(str, self.sizes)) + "}"
        typ = " ".join(f"{g}^{c}" for g, c in self.groups)
        if self.kind == "S":
            return f"S(3,{fam},{self.points})"
        if self.kind == "HS":
            return f"HS(3,{fam};{self.points},{self.hole})"
        if self.kind == "GDD":
            return f"GDD(3,{fam},{self.points}) type {typ}"
        return f"CS(3,{fam},{self.points}) type ({typ}:{self.stem})"
