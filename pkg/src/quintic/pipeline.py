"""Route selection, ingredient registry and the on-disk ingredient cache.

A spec is resolved by the first source that applies: a catalog entry, a
recursive construction, or exact cover search (whose results are kept in
the cache directory).  Every resolution records a :class:`ConstructionTrace`
node, so the tree below a built design says where each piece came from.
"""
from __future__ import annotations

import json
import os
import tempfile
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

from . import constructs, paperdata
from .core import DesignDocument, DesignError, IngredientSpec, deserialize, serialize
from .search import DEFAULT_BUDGET, BudgetExhausted, find_design
from .verify import admissible, verify

__all__ = [
    "IngredientSpec",
    "ConstructionTrace",
    "DesignCache",
    "Registry",
    "Inadmissible",
    "Unreachable",
    "build",
    "plan",
    "TRACE_LABELS",
    "SEARCH_POINT_LIMIT",
]

# Labels a trace node may carry in ``paper_ref``.
TRACE_LABELS = (
    "T1.3", "L2.1", "C2.2", "L2.3", "L2.4", "L2.5", "C2.6", "C2.7", "C2.8",
    "L3.1", "L3.2", "L3.3", "L3.4", "L3.5", "L3.6", "L3.7", "L3.8",
    "L4.2", "L4.3", "L4.4", "trivial", "search",
)

# Plain search is only attempted up to this many points.
SEARCH_POINT_LIMIT = 14

# block orders of the quoted 3-BD family used for the weight-by-10 route
BD_SIZES = (4, 5, 6, 7, 9, 11, 13, 15, 19, 23, 27)


class Inadmissible(DesignError):
    def __init__(self, v: int, reason: str):
        self.v = v
        super().__init__(f"v={v}: {reason}")


class Unreachable(DesignError):
    """No route produced the spec; ``attempts`` says why each one failed."""

    def __init__(self, spec: IngredientSpec, attempts: list[str]):
        self.spec = spec
        self.attempts = list(attempts)
        lines = [f"ingredient unreachable: {spec}"] + [f"  - {a}" for a in self.attempts]
        super().__init__("\n".join(lines))

    def to_json(self) -> dict:
        return {"unreachable": str(self.spec), "spec": self.spec.to_json(), "attempts": self.attempts}


@dataclass
class ConstructionTrace:
    operator: str
    paper_ref: str
    spec: IngredientSpec
    parameters: dict = field(default_factory=dict)
    children: list["ConstructionTrace"] = field(default_factory=list)
    ingredient: str | None = None
    header: dict | None = None
    block_count: int | None = None
    cache_hit: bool | None = None

    def to_json(self) -> dict:
        out = {
            "operator": self.operator,
            "paperRef": self.paper_ref,
            "spec": str(self.spec),
            "parameters": self.parameters,
        }
        if self.ingredient is not None:
            out["ingredient"] = self.ingredient
        if self.header is not None:
            out["header"] = self.header
        if self.block_count is not None:
            out["blockCount"] = self.block_count
        if self.cache_hit is not None:
            out["cacheHit"] = self.cache_hit
        out["children"] = [c.to_json() for c in self.children]
        return out

    def walk(self):
        yield self
        for c in self.children:
            yield from c.walk()

    def leaves(self) -> list["ConstructionTrace"]:
        return [n for n in self.walk() if not n.children]

    def render_text(self, indent: int = 0) -> str:
        bits = [f"{self.paper_ref} {self.operator}", str(self.spec)]
        if self.parameters:
            bits.append(" ".join(f"{k}={v}" for k, v in self.parameters.items()))
        if self.ingredient:
            bits.append(f"[{self.ingredient}]")
        if self.block_count is not None:
            bits.append(f"{self.block_count} blocks")
        if self.cache_hit is not None:
            bits.append("cached" if self.cache_hit else "not cached")
        out = ["  " * indent + " | ".join(bits)]
        out += [c.render_text(indent + 1) for c in self.children]
        return "\n".join(out)


# -- cache --------------------------------------------------------------------------


class DesignCache:
    """Directory of canonical design files named ``<spec digest>.design.json``."""

    def __init__(self, root: str | os.PathLike):
        self.root = Path(root)

    def path(self, spec: IngredientSpec) -> Path:
        return self.root / f"{spec.digest()}.design.json"

    def has(self, spec: IngredientSpec) -> bool:
        return self.path(spec).is_file()

    def get(self, spec: IngredientSpec) -> DesignDocument | None:
        p = self.path(spec)
        if not p.is_file():
            return None
        try:
            doc = deserialize(p.read_bytes())
            ok = _matches(doc, spec) and verify(doc).valid
        except (DesignError, OSError, UnicodeDecodeError):
            ok = False
        if not ok:
            p.unlink(missing_ok=True)
            return None
        return doc

    def put(self, spec: IngredientSpec, doc: DesignDocument) -> Path:
        self.root.mkdir(parents=True, exist_ok=True)
        p = self.path(spec)
        fd, tmp = tempfile.mkstemp(dir=self.root, suffix=".tmp")
        with os.fdopen(fd, "wb") as fh:
            fh.write(serialize(doc))
        os.replace(tmp, p)
        return p

    def entries(self) -> list[tuple[str, dict]]:
        if not self.root.is_dir():
            return []
        out = []
        for p in sorted(self.root.glob("*.design.json")):
            try:
                head = deserialize(p.read_bytes()).header()
            except (DesignError, OSError, UnicodeDecodeError):
                head = {"corrupt": True}
            out.append((p.name, head))
        return out

    def clear(self) -> int:
        n = 0
        if self.root.is_dir():
            for p in self.root.glob("*.design.json"):
                p.unlink()
                n += 1
        return n


def _matches(doc: DesignDocument, spec: IngredientSpec) -> bool:
    got = IngredientSpec.of(doc, spec.sizes)
    if got.kind != spec.kind or got.family != spec.family or got.points != spec.points:
        return False
    if got.groups != spec.groups or got.stem != spec.stem or got.hole != spec.hole:
        return False
    return all(len(b) in spec.sizes for b in doc.blocks) if spec.family == "COMPLETE" else True


# -- routes --------------------------------------------------------------------------


@dataclass
class Route:
    operator: str
    paper_ref: str
    parameters: dict
    deps: list[IngredientSpec]
    run: Callable[[Callable[[IngredientSpec], DesignDocument]], DesignDocument]
    ingredient: str | None = None


def _k4e(kind, groups=(), stem=0, points=0, hole=0) -> IngredientSpec:
    return IngredientSpec(kind, "K4E", points=points, groups=groups, stem=stem, hole=hole)


def _cx(kind, sizes, groups=(), stem=0, points=0) -> IngredientSpec:
    return IngredientSpec(kind, "COMPLETE", points=points, groups=groups, stem=stem, sizes=sizes)


def _fill_deps(cs: IngredientSpec) -> list[IngredientSpec]:
    layout = cs.layout()
    s = cs.stem
    deps = [cs]
    for i, g in enumerate(layout.groups):
        n = len(g) + s
        dep = _k4e("S", points=n) if i == len(layout.groups) - 1 else _k4e("HS", points=n, hole=s)
        if dep not in deps:
            deps.append(dep)
    return deps


def _inflation_deps(master: IngredientSpec, b: int, r: int) -> list[IngredientSpec]:
    deps = [master]
    for k in master.sizes:
        for d in (_k4e("CS", groups=((b, k - 1),), stem=r), _k4e("GDD", groups=((b, k),))):
            if d not in deps:
                deps.append(d)
    return deps


def _search_ref(spec: IngredientSpec) -> str:
    if spec.family == "COMPLETE":
        if spec.kind == "S" and spec.sizes == (4,):
            return "T1.3"
        if spec.kind == "GDD":
            return "L2.1"
        if spec.kind == "CS":
            return "L2.3"
        if spec.kind == "S":
            return "L2.5"
    return "search"


class Registry:
    """Resolves ingredient specs, memoising results for the registry's lifetime."""

    def __init__(
        self,
        cache: DesignCache | str | os.PathLike | None = None,
        budget: int | None = DEFAULT_BUDGET,
        backend: str | None = None,
        search_limit: int = SEARCH_POINT_LIMIT,
    ):
        self.cache = DesignCache(cache) if cache is not None and not isinstance(cache, DesignCache) else cache
        self.budget = budget
        self.backend = backend
        self.search_limit = search_limit
        self._memo: dict[IngredientSpec, tuple[DesignDocument, ConstructionTrace]] = {}

    # route selection ---------------------------------------------------------------

    def route(self, spec: IngredientSpec) -> Route:
        attempts: list[str] = []
        cid = paperdata.find(spec) if spec.family == "K4E" else None
        if cid is not None:
            label = paperdata._raw()[cid]["lemma"]
            return Route("catalog", label, {}, [], lambda sup: paperdata.load(cid), ingredient=cid)
        r = self._construction(spec, attempts)
        if r is not None:
            return r
        if spec.family == "COMPLETE" and spec.kind in ("S", "HS") and spec.points in spec.sizes:
            return Route("trivial", "trivial", {}, [], lambda sup: self._search(spec))
        if spec.points <= self.search_limit:
            return Route("search", _search_ref(spec), {"points": spec.points}, [], lambda sup: self._search(spec))
        attempts.append(f"search: {spec.points} points exceeds the search limit of {self.search_limit}")
        raise Unreachable(spec, attempts)

    def _construction(self, spec: IngredientSpec, attempts: list[str]) -> Route | None:
        if spec.family == "K4E":
            if spec.kind == "S":
                return self._s_route(spec.points, attempts)
            if spec.kind == "CS" and len(spec.groups) == 1:
                return self._cs_route(spec, attempts)
            if spec.kind == "GDD" and len(spec.groups) == 1 and spec.groups[0][0] == 10:
                return self._gdd10_route(spec.groups[0][1], attempts)
            return None
        if set(spec.sizes) == {4, 6}:
            if spec.kind == "S" and spec.points % 2 == 0 and spec.points >= 4:
                v = spec.points
                if v in (4, 6):
                    return None
                dep = _cx("CS", (4, 6), groups=((2, (v - 2) // 2),), stem=2)
                return Route("bd46_even", "L2.4", {"v": v}, [dep], lambda sup: constructs.fill_with_complete(sup(dep)))
            if spec.kind == "CS" and len(spec.groups) == 1:
                (g, n), s = spec.groups[0], spec.stem
                if (g, s) == (1, 1) and n % 2 == 1:
                    dep = _cx("S", (4, 6), points=n + 1)
                    return Route("cs_trivial", "L4.4", {"x0": 0}, [dep], lambda sup: constructs.cs_trivial(sup(dep), 0))
                if (g, s) == (2, 2) and n >= 3:
                    if n % 3 in (0, 1):
                        dep = _cx("S", (4,), points=2 * n + 2)
                        run = lambda sup: constructs.cs_pair_deletion_from_sqs(sup(dep), 0, 1)  # noqa: E731
                        return Route("cs_pair_deletion_from_sqs", "L2.3", {"a": 0, "b": 1}, [dep], run)
                    dep = _cx("CS", (4,), groups=((6, (n + 1) // 3),))

                    def run(sup):
                        h = sup(dep)
                        return constructs.cs_pair_deletion_from_h(h, h.groups[0][0], h.groups[1][0])

                    return Route("cs_pair_deletion_from_h", "L2.3", {"c": "G0[0]", "d": "G1[0]"}, [dep], run)
        return None

    def _fill(self, cs: IngredientSpec, route: str) -> Route:
        return Route("fill", "C2.7", {"route": route}, _fill_deps(cs), lambda sup: constructs.fill(sup(cs), sup))

    def _s_route(self, v: int, attempts: list[str]) -> Route | None:
        m, u = v % 10, v // 10
        if m in (0, 1, 2):
            if u == 3:
                return self._fill(_k4e("CS", groups=((15, 2),)), "L4.2") if m == 0 else None
            if u >= 2:
                return self._fill(_k4e("CS", groups=((10, u),), stem=m), "L4.2")
        elif m in (5, 6):
            if v == 25:
                return self._fill(_k4e("CS", groups=((6, 4),), stem=1), "L4.3")
            n = (v - m) // 10
            if n >= 3:
                return self._fill(_k4e("CS", groups=((10, n),), stem=m), "L4.3")
        elif m == 7 and v > 7:
            return self._fill(_k4e("CS", groups=((5, (v - 2) // 5),), stem=2), "L4.4")
        attempts.append(f"no recursive route for an S(3,K4E,{v})")
        return None

    def _cs_route(self, spec: IngredientSpec, attempts: list[str]) -> Route | None:
        (g, n), s = spec.groups[0], spec.stem
        if g == 10 and s in (0, 1, 2) and n >= 4:
            gdd, pair = _k4e("GDD", groups=((10, n),)), _k4e("CS", groups=((10, 2),), stem=s)
            run = lambda sup: constructs.cs_from_pairs(sup(gdd), sup(pair))  # noqa: E731
            return Route("cs_from_pairs", "C2.6", {"n": n, "s": s}, [gdd, pair], run)
        if g == 10 and s in (5, 6) and n >= 3:
            return self._inflate(_cx("CS", (4, 6), groups=((2, n),), stem=2), 5, s - 5)
        if g == 5 and s == 2 and n % 2 == 1 and n >= 3:
            return self._inflate(_cx("CS", (4, 6), groups=((1, n),), stem=1), 5, 2)
        attempts.append(f"no recursive route for {spec}")
        return None

    def _inflate(self, master: IngredientSpec, b: int, r: int) -> Route:
        run = lambda sup: constructs.inflate_hfc(sup(master), b, r, sup)  # noqa: E731
        return Route("inflate_hfc", "C2.8", {"b": b, "r": r}, _inflation_deps(master, b, r), run)

    def _gdd10_route(self, n: int, attempts: list[str]) -> Route | None:
        if n < 4:
            attempts.append(f"GDD type 10^{n}: needs at least 4 groups")
            return None
        if n in (5, 21) or n > 27:
            attempts.append(f"L2.1: a GDD(3,{{4,6}},{2 * n}) of type 2^{n} is only quoted for 4 <= n <= 27, n != 5, 21")
        elif 2 * n > self.search_limit:
            attempts.append(f"L2.1: GDD(3,{{4,6}},{2 * n}) type 2^{n} exceeds the search limit of {self.search_limit}")
        else:
            master = _cx("GDD", (4, 6), groups=((2, n),))
            deps = [master, _k4e("GDD", groups=((5, 4),)), _k4e("GDD", groups=((5, 6),))]
            run = lambda sup: constructs.weight_gdd(sup(master), 5, sup)  # noqa: E731
            return Route("weight_gdd", "C2.2", {"h": 5}, deps, run)
        sizes = tuple(k for k in BD_SIZES if k <= n)
        if n > self.search_limit:
            attempts.append(f"L2.5: the master S(3,{{{','.join(map(str, sizes))}}},{n}) exceeds the search limit of {self.search_limit}")
            return None
        master = _cx("S", sizes, points=n)
        deps = [master] + [_k4e("GDD", groups=((10, k),)) for k in sizes]
        run = lambda sup: constructs.weight_gdd(sup(master), 10, sup)  # noqa: E731
        return Route("weight_gdd", "C2.2", {"h": 10}, deps, run)

    # execution ------------------------------------------------------------------------

    def _search(self, spec: IngredientSpec) -> DesignDocument:
        if self.cache is not None:
            doc = self.cache.get(spec)
            if doc is not None:
                return doc
        try:
            doc = find_design(spec, budget=self.budget, backend=self.backend)
        except BudgetExhausted as exc:
            raise Unreachable(spec, [f"search: node budget exhausted after {exc.nodes} nodes"]) from None
        if doc is None:
            raise Unreachable(spec, ["search: the complete search space holds no solution"])
        if self.cache is not None:
            self.cache.put(spec, doc)
        return doc

    def resolve_traced(self, spec: IngredientSpec) -> tuple[DesignDocument, ConstructionTrace]:
        hit = self._memo.get(spec)
        if hit is not None:
            return hit
        route = self.route(spec)
        children: dict[IngredientSpec, ConstructionTrace] = {}

        def supplier(s: IngredientSpec) -> DesignDocument:
            doc, tr = self.resolve_traced(s)
            children.setdefault(s, tr)
            return doc

        doc = route.run(supplier)
        if not _matches(doc, spec):
            raise DesignError(f"route {route.operator} produced {IngredientSpec.of(doc)} for {spec}")
        trace = ConstructionTrace(
            operator=route.operator,
            paper_ref=route.paper_ref,
            spec=spec,
            parameters=route.parameters,
            children=list(children.values()),
            ingredient=route.ingredient,
            header=doc.header(),
            block_count=doc.block_count,
        )
        self._memo[spec] = (doc, trace)
        return doc, trace

    def resolve(self, spec: IngredientSpec) -> DesignDocument:
        return self.resolve_traced(spec)[0]

    def plan_spec(self, spec: IngredientSpec) -> ConstructionTrace:
        route = self.route(spec)
        cached = None
        if route.operator == "search":
            cached = self.cache is not None and self.cache.has(spec)
        return ConstructionTrace(
            operator=route.operator,
            paper_ref=route.paper_ref,
            spec=spec,
            parameters=route.parameters,
            children=[self.plan_spec(d) for d in route.deps],
            ingredient=route.ingredient,
            cache_hit=cached,
        )

    # targets ------------------------------------------------------------------------------

    def _target(self, v: int) -> IngredientSpec:
        rep = admissible(v)
        if not rep.admissible:
            failed = ", ".join(k for k, ok in rep.passes.items() if not ok)
            raise Inadmissible(v, f"not admissible (fails: {failed})")
        if v < 7:
            raise Inadmissible(v, "admissible but no design exists (see `nonexist`)")
        return _k4e("S", points=v)

    def build(self, v: int) -> tuple[DesignDocument, ConstructionTrace]:
        return self.resolve_traced(self._target(v))

    def plan(self, v: int) -> ConstructionTrace:
        return self.plan_spec(self._target(v))


def build(v: int, cache=None, budget: int | None = DEFAULT_BUDGET) -> tuple[DesignDocument, ConstructionTrace]:
    return Registry(cache, budget).build(v)


def plan(v: int, cache=None) -> ConstructionTrace:
    return Registry(cache).plan(v)


def trace_json(trace: ConstructionTrace) -> str:
    return json.dumps(trace.to_json(), indent=1, sort_keys=False) + "\n"
