"""The direct constructions, stored as base-block data files.

Each file in ``data/`` reproduces one table: either base blocks plus the
development rule, or an explicit block list.  Loading develops the table
and runs the verifier, so a transcription slip surfaces as an uncovered or
doubly covered triple.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources

from ..core import DesignDocument, DesignError, IngredientSpec
from ..devel import DevelopmentRule, develop, expand_groups, expand_multipliers, orbit_count
from ..verify import verify


class CatalogError(DesignError):
    pass


@dataclass(frozen=True)
class CatalogEntry:
    id: str
    lemma: str
    spec: IngredientSpec
    block_count: int
    rule: DevelopmentRule | None
    base_count: int

    def to_json(self) -> dict:
        return {
            "id": self.id,
            "lemma": self.lemma,
            "header": self.spec.to_json(),
            "blockCount": self.block_count,
            "developed": self.rule is not None,
            "baseBlocks": self.base_count,
        }


def _kind_order(entry_id: str):
    lemma, kind, *rest = entry_id.split("-", 2)
    nums = [int(x) for x in rest[0].replace("^", "-").split("-")] if rest else []
    return lemma, nums


@lru_cache(maxsize=None)
def _raw() -> dict[str, dict]:
    out = {}
    for f in resources.files(__name__).joinpath("data").iterdir():
        if f.name.endswith(".json"):
            obj = json.loads(f.read_text(encoding="utf-8"))
            out[obj["id"]] = obj
    return dict(sorted(out.items(), key=lambda kv: _kind_order(kv[0])))


def _rule(obj: dict) -> DevelopmentRule | None:
    if "blocks" in obj:
        return None
    return DevelopmentRule(
        modulus=obj["modulus"],
        increment=obj.get("increment", 1),
        multipliers=tuple(obj.get("multipliers", [1])),
        fixed_inf=tuple(obj.get("fixedInf", [])),
        cyclic_inf=tuple(tuple(c) for c in obj.get("cyclicInf", [])),
    )


def _entry(obj: dict) -> CatalogEntry:
    t = obj["target"]
    rule = _rule(obj)
    pm = rule.point_map() if rule else {}
    groups = expand_groups(t.get("groupsSpec", []), pm)
    sizes: dict[int, int] = {}
    for g in groups:
        sizes[len(g)] = sizes.get(len(g), 0) + 1
    spec = IngredientSpec(
        kind=t["kind"],
        family="K4E",
        points=t["points"],
        groups=tuple(sizes.items()),
        stem=len(t.get("stem", [])),
        hole=len(t.get("hole", [])),
    )
    if rule:
        count = orbit_count(rule, len(obj["bases"]))
        nbase = len(obj["bases"])
    else:
        count = nbase = len(obj["blocks"])
    return CatalogEntry(obj["id"], obj["lemma"], spec, count, rule, nbase)


def catalog() -> list[CatalogEntry]:
    """All entries, in a stable order."""
    return [_entry(obj) for obj in _raw().values()]


def find(spec: IngredientSpec) -> str | None:
    for e in catalog():
        if e.spec == spec:
            return e.id
    return None


@lru_cache(maxsize=None)
def load(entry_id: str) -> DesignDocument:
    """Develop and verify one catalog entry."""
    raw = _raw()
    if entry_id not in raw:
        raise KeyError(f"unknown catalog id {entry_id!r}")
    obj = raw[entry_id]
    entry = _entry(obj)
    t = obj["target"]
    if entry.rule is None:
        pm = {}
        blocks = [tuple(b) for b in obj["blocks"]]
    else:
        bases = [tuple(b) for b in obj["bases"]]
        arr, pm = develop(expand_multipliers(bases, entry.rule), entry.rule)
        blocks = [tuple(r) for r in arr.tolist()]
    doc = DesignDocument(
        kind=t["kind"],
        family="K4E",
        points=t["points"],
        groups=expand_groups(t.get("groupsSpec", []), pm),
        stem=[pm[s] if isinstance(s, str) else s for s in t.get("stem", [])],
        hole=[pm[s] if isinstance(s, str) else s for s in t.get("hole", [])],
        blocks=blocks,
    ).canonical()
    rep = verify(doc)
    if not rep.valid or doc.block_count != entry.block_count:
        raise CatalogError(f"{entry_id} failed verification: {rep.render_text(5)}")
    return doc
