"""Base-block development under cyclic groups.

A base block is a 5-tuple whose coordinates are residues mod ``n`` or named
infinity points.  Residues move by the shift, fixed infinities stay put and
members of a cyclic infinity class advance one position per unit of shift.
"""
from __future__ import annotations

from dataclasses import dataclass
from math import gcd
from typing import Sequence, Union

import numpy as np

from .core import K4E_EDGES, DesignError, encode_sorted

Symbol = Union[int, str]
SymbolicBlock = tuple[Symbol, Symbol, Symbol, Symbol, Symbol]


class DevelopmentError(DesignError):
    pass


class ShortOrbitError(DevelopmentError):
    """Two developed (or multiplied) blocks have the same edge set."""

    def __init__(self, first, second):
        self.pair = (first, second)
        super().__init__(f"short orbit: {first} and {second} have the same edge set")


@dataclass(frozen=True)
class DevelopmentRule:
    modulus: int
    increment: int = 1
    multipliers: tuple[int, ...] = (1,)
    fixed_inf: tuple[str, ...] = ()
    cyclic_inf: tuple[tuple[str, ...], ...] = ()

    def __post_init__(self):
        n, k = self.modulus, self.increment
        object.__setattr__(self, "multipliers", tuple(int(m) % n for m in self.multipliers))
        object.__setattr__(self, "fixed_inf", tuple(self.fixed_inf))
        object.__setattr__(self, "cyclic_inf", tuple(tuple(c) for c in self.cyclic_inf))
        if n <= 0 or k <= 0 or n % k:
            raise DevelopmentError(f"increment {k} must divide modulus {n}")
        if not self.multipliers:
            raise DevelopmentError("at least one multiplier is required")
        for m in self.multipliers:
            if gcd(m, n) != 1:
                raise DevelopmentError(f"multiplier {m} is not a unit mod {n}")
        names = self.infinities
        if len(set(names)) != len(names):
            raise DevelopmentError("infinity names must be unique")
        if self.cyclic_inf and k != 1:
            raise DevelopmentError("cyclic infinity classes need increment 1")

    @property
    def infinities(self) -> tuple[str, ...]:
        return self.fixed_inf + tuple(x for c in self.cyclic_inf for x in c)

    def point_map(self) -> dict[Symbol, int]:
        """Residues to ``0..n-1``, then infinities in declaration order."""
        pm: dict[Symbol, int] = {r: r for r in range(self.modulus)}
        for i, name in enumerate(self.infinities):
            pm[name] = self.modulus + i
        return pm

    @property
    def point_count(self) -> int:
        return self.modulus + len(self.infinities)


def orbit_count(rule: DevelopmentRule, base_count: int) -> int:
    return base_count * (rule.modulus // rule.increment) * len(rule.multipliers)


def _check_base(b: Sequence[Symbol], rule: DevelopmentRule) -> None:
    if len(b) != 5 or len(set(b)) != 5:
        raise DevelopmentError(f"base block {tuple(b)} needs 5 distinct coordinates")
    names = set(rule.infinities)
    for c in b:
        if isinstance(c, str):
            if c not in names:
                raise DevelopmentError(f"undeclared infinity {c!r} in {tuple(b)}")
        elif not 0 <= c < rule.modulus:
            raise DevelopmentError(f"residue {c} out of range mod {rule.modulus}")


def _edge_key(b: Sequence[Symbol]) -> frozenset:
    return frozenset(frozenset((b[i], b[j], b[k])) for i, j, k in K4E_EDGES)


def expand_multipliers(bases: Sequence[Sequence[Symbol]], rule: DevelopmentRule) -> list[SymbolicBlock]:
    n = rule.modulus
    moving = {x for c in rule.cyclic_inf for x in c}
    seen: dict[frozenset, tuple] = {}
    out: list[SymbolicBlock] = []
    for m in rule.multipliers:
        for b in bases:
            _check_base(b, rule)
            if len(rule.multipliers) > 1 and moving & set(b):
                raise DevelopmentError("cyclic infinities cannot be combined with multipliers")
            mb = tuple(c if isinstance(c, str) else (m * c) % n for c in b)
            key = _edge_key(mb)
            if key in seen:
                raise ShortOrbitError(seen[key], mb)
            seen[key] = mb
            out.append(mb)  # type: ignore[arg-type]
    return out


def _shift_table(rule: DevelopmentRule) -> tuple[np.ndarray, dict[Symbol, int]]:
    """``table[s, t]`` is the point reached by symbol index ``s`` after shift step ``t``."""
    n, k = rule.modulus, rule.increment
    pm = rule.point_map()
    steps = np.arange(0, n, k, dtype=np.int64)
    table = np.empty((rule.point_count, len(steps)), dtype=np.int64)
    table[:n] = (np.arange(n)[:, None] + steps[None, :]) % n
    for name in rule.fixed_inf:
        table[pm[name]] = pm[name]
    for cls in rule.cyclic_inf:
        L = len(cls)
        for pos, name in enumerate(cls):
            table[pm[name]] = [pm[cls[(pos + t) % L]] for t in steps]
    return table, pm


def develop(bases: Sequence[Sequence[Symbol]], rule: DevelopmentRule) -> tuple[np.ndarray, dict[Symbol, int]]:
    """Develop multiplier-expanded base blocks; returns an ``(N, 5)`` point array and the point map.

    Blocks are listed base-major, shift-minor, unchanged in labelling (callers
    canonicalise).  Raises :class:`ShortOrbitError` if two blocks coincide.
    """
    for b in bases:
        _check_base(b, rule)
    table, pm = _shift_table(rule)
    if not bases:
        return np.zeros((0, 5), dtype=np.int64), pm
    idx = np.array([[pm[c] for c in b] for b in bases], dtype=np.int64)
    # (bases, 5, steps) -> (bases, steps, 5)
    blocks = table[idx].transpose(0, 2, 1).reshape(-1, 5)
    srt = np.sort(blocks, axis=1)
    if (srt[:, 1:] == srt[:, :-1]).any():
        bad = int(np.nonzero((srt[:, 1:] == srt[:, :-1]).any(axis=1))[0][0])
        raise DevelopmentError(f"coordinate collision in developed block {blocks[bad].tolist()}")
    keys = np.sort(
        np.stack([encode_sorted(blocks[:, list(e)]) for e in K4E_EDGES], axis=1), axis=1
    )
    _, first, counts = np.unique(keys, axis=0, return_index=True, return_counts=True)
    if len(first) != len(blocks):
        dup_key = keys[first[np.nonzero(counts > 1)[0][0]]]
        hits = np.nonzero((keys == dup_key).all(axis=1))[0]
        raise ShortOrbitError(blocks[hits[0]].tolist(), blocks[hits[1]].tolist())
    expected = len(bases) * (rule.modulus // rule.increment)
    assert len(blocks) == expected
    return blocks, pm


def expand_groups(spec: Sequence, pm: dict[Symbol, int]) -> list[tuple[int, ...]]:
    """Expand group specs: ``{"ap": [c, g]}`` is the family ``c*Z_g + j`` for
    ``j < c``; a plain list names the members of one group."""
    groups: list[tuple[int, ...]] = []
    for item in spec:
        if isinstance(item, dict):
            c, g = item["ap"]
            groups.extend(tuple(j + c * t for t in range(g)) for j in range(c))
        else:
            groups.append(tuple(pm[x] for x in item))
    return groups
