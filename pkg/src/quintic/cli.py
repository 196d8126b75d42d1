"""``quintic`` command line.

Exit codes: 0 success or valid, 1 invalid design / failed construction /
unexpected nonexistence result, 2 usage error.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
import time
from pathlib import Path

from . import paperdata
from .core import DesignDocument, DesignError, IngredientSpec, InvariantViolation, deserialize, serialize
from .pipeline import ConstructionTrace, DesignCache, Inadmissible, Registry, Unreachable
from .search import DEFAULT_BUDGET, prove_nonexistence
from .verify import admissible, verify

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


def _default_cache() -> str:
    env = os.environ.get("QUINTIC_CACHE")
    if env:
        return env
    base = os.environ.get("XDG_CACHE_HOME") or os.path.join(os.path.expanduser("~"), ".cache")
    return os.path.join(base, "quintic")


def _positive(kind):
    def conv(text):
        try:
            val = kind(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
        if val < 1:
            raise argparse.ArgumentTypeError("must be at least 1")
        return val

    return conv


def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--cache", default=None, help="cache directory (default: $QUINTIC_CACHE or ~/.cache/quintic)")
    common.add_argument("--out", default=None, help="write the main output to this file")
    common.add_argument(
        "--format", choices=("json", "text"), default=None,
        help="report format (default text); designs are written as JSON unless text is asked for",
    )
    common.add_argument("--budget", type=_positive(int), default=DEFAULT_BUDGET, help="search node budget")
    common.add_argument("--jobs", type=_positive(int), default=os.cpu_count() or 1, help="verification threads")

    p = argparse.ArgumentParser(prog="quintic", description="Build and check S(3, K4+e, v) designs.")
    sub = p.add_subparsers(dest="command", required=True, metavar="COMMAND")
    c = sub.add_parser("construct", parents=[common], help="build an S(3,K4+e,v)")
    c.add_argument("v", type=int)
    c = sub.add_parser("verify", parents=[common], help="verify a design file ('-' for stdin)")
    c.add_argument("file")
    c = sub.add_parser("admissible", parents=[common], help="check the divisibility conditions")
    c.add_argument("v", type=int)
    c = sub.add_parser("nonexist", parents=[common], help="exhaustive nonexistence certificate for v = 5, 6")
    c.add_argument("v", type=int)
    c.add_argument("--prefilter", action="store_true", help="apply the degree counting pre-filter")
    c = sub.add_parser("ingredient", parents=[common], help="resolve an ingredient spec given as JSON or @file")
    c.add_argument("spec")
    c = sub.add_parser("plan", parents=[common], help="show the construction tree without building")
    c.add_argument("v", type=int)
    c = sub.add_parser("catalog", parents=[common], help="list the built-in direct constructions")
    c.add_argument("--check", action="store_true", help="develop and verify every entry")
    c = sub.add_parser("cache", parents=[common], help="inspect or clear the ingredient cache")
    c.add_argument("action", choices=("ls", "clear"))
    return p


class _Usage(Exception):
    pass


def _emit(args, text: str | bytes) -> None:
    data = text.encode() if isinstance(text, str) else text
    if args.out:
        Path(args.out).write_bytes(data)
    else:
        sys.stdout.write(data.decode())
        sys.stdout.flush()


def _json(obj) -> str:
    return json.dumps(obj, indent=1) + "\n"


def _note(msg: str) -> None:
    print(msg, file=sys.stderr)


def _tuples(doc: DesignDocument) -> str:
    head = doc.header()
    lines = [" ".join(f"{k}={v}" for k, v in head.items())]
    lines += ["(" + ",".join(map(str, b)) + ")" for b in doc.blocks]
    return "\n".join(lines) + "\n"


def _design_output(args, doc: DesignDocument, trace: ConstructionTrace) -> None:
    if args.format == "text":
        _emit(args, _tuples(doc))
    else:
        _emit(args, serialize(doc))
    if args.out:
        Path(str(args.out) + ".trace.json").write_text(_json(trace.to_json()))
        _note(f"wrote {args.out} ({doc.block_count} blocks) and {args.out}.trace.json")


def _registry(args) -> Registry:
    return Registry(cache=args.cache or _default_cache(), budget=args.budget)


def _failure(args, err: DesignError) -> int:
    if args.format == "json":
        body = err.to_json() if isinstance(err, Unreachable) else {"error": str(err)}
        sys.stdout.write(_json(body))
    _note(f"error: {err}")
    return EXIT_FAIL


def cmd_construct(args) -> int:
    reg = _registry(args)
    try:
        doc, trace = reg.build(args.v)
    except DesignError as err:
        return _failure(args, err)
    rep = verify(doc, jobs=args.jobs)
    if not rep.valid:
        _note(rep.render_text())
        return EXIT_FAIL
    _design_output(args, doc, trace)
    return EXIT_OK


def _read_design(path: str) -> bytes:
    if path == "-":
        return sys.stdin.buffer.read()
    try:
        return Path(path).read_bytes()
    except OSError as exc:
        raise _Usage(f"cannot read {path}: {exc.strerror}") from None


def cmd_verify(args) -> int:
    data = _read_design(args.file)
    try:
        doc = deserialize(data, strict=False)
    except InvariantViolation as err:
        if args.format == "json":
            _emit(args, _json({"valid": False, "malformed": err.report()}))
        else:
            _emit(args, f"MALFORMED: {err}\n")
        return EXIT_FAIL
    rep = verify(doc, jobs=args.jobs)
    _emit(args, _json(rep.to_json()) if args.format == "json" else rep.render_text() + "\n")
    return EXIT_OK if rep.valid else EXIT_FAIL


def cmd_admissible(args) -> int:
    if args.v < 0:
        raise _Usage("v must be nonnegative")
    rep = admissible(args.v)
    if args.format == "json":
        _emit(args, _json(rep.to_json()))
    else:
        checks = " ".join(f"{k}:{'ok' if ok else 'FAIL'}" for k, ok in rep.passes.items())
        verdict = "admissible" if rep.admissible else "not admissible"
        exists = "exists" if rep.exists_per_theorem else "does not exist"
        _emit(args, f"v={rep.v}: {verdict} ({checks}); d0={rep.d0} d1={rep.d1} d2={rep.d2}; design {exists}\n")
    return EXIT_OK if rep.admissible else EXIT_FAIL


def cmd_nonexist(args) -> int:
    if args.v not in (5, 6):
        raise _Usage("nonexist takes v = 5 or v = 6")
    cert = prove_nonexistence(args.v, prefilter=args.prefilter)
    if args.format == "json":
        _emit(args, _json(cert.to_json()))
    else:
        _emit(
            args,
            f"v={cert.v}: {cert.candidate_count} candidate blocks, {cert.blocks_required} blocks needed, "
            f"{cert.nodes_explored} nodes, {cert.solutions_found} solutions, "
            f"{'complete' if cert.exhausted else 'INCOMPLETE'} traversal ({cert.wall_time:.3f}s)\n"
            f"ordering {cert.ordering_fingerprint}\n",
        )
    return EXIT_OK if cert.solutions_found == 0 and cert.exhausted else EXIT_FAIL


def _parse_spec(text: str) -> IngredientSpec:
    if text.startswith("@"):
        try:
            text = Path(text[1:]).read_text()
        except OSError as exc:
            raise _Usage(f"cannot read {text[1:]}: {exc.strerror}") from None
    try:
        return IngredientSpec.from_json(json.loads(text))
    except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        raise _Usage(
            f"bad ingredient spec ({exc}); expected e.g. "
            '\'{"kind":"S","family":"COMPLETE","points":8,"sizes":[4]}\''
        ) from None


def cmd_ingredient(args) -> int:
    spec = _parse_spec(args.spec)
    reg = _registry(args)
    try:
        doc, trace = reg.resolve_traced(spec)
    except DesignError as err:
        return _failure(args, err)
    _design_output(args, doc, trace)
    return EXIT_OK


def cmd_plan(args) -> int:
    reg = _registry(args)
    try:
        trace = reg.plan(args.v)
    except DesignError as err:
        return _failure(args, err)
    _emit(args, _json(trace.to_json()) if args.format == "json" else trace.render_text() + "\n")
    return EXIT_OK


def cmd_catalog(args) -> int:
    rows = []
    for e in paperdata.catalog():
        row = e.to_json()
        row["spec"] = str(e.spec)
        if args.check:
            t0 = time.perf_counter()
            try:
                doc = paperdata.load(e.id)
                row["verified"] = verify(doc).valid and doc.block_count == e.block_count
            except DesignError:
                row["verified"] = False
            row["seconds"] = round(time.perf_counter() - t0, 4)
        rows.append(row)
    if args.format == "json":
        _emit(args, _json(rows))
    else:
        lines = []
        for r in rows:
            extra = f"  {'ok' if r['verified'] else 'FAILED'} {r['seconds']:.3f}s" if args.check else ""
            lines.append(f"{r['id']:<16} {r['spec']:<32} {r['blockCount']:>5} blocks{extra}")
        _emit(args, "\n".join(lines) + "\n")
    return EXIT_OK if all(r.get("verified", True) for r in rows) else EXIT_FAIL


def cmd_cache(args) -> int:
    cache = DesignCache(args.cache or _default_cache())
    if args.action == "clear":
        n = cache.clear()
        _emit(args, _json({"removed": n}) if args.format == "json" else f"removed {n} entries from {cache.root}\n")
        return EXIT_OK
    entries = cache.entries()
    if args.format == "json":
        _emit(args, _json([{"file": f, "header": h} for f, h in entries]))
    else:
        lines = [f"{f}  {json.dumps(h, separators=(',', ':'))}" for f, h in entries]
        _emit(args, "\n".join(lines) + ("\n" if lines else ""))
    return EXIT_OK


COMMANDS = {
    "construct": cmd_construct,
    "verify": cmd_verify,
    "admissible": cmd_admissible,
    "nonexist": cmd_nonexist,
    "ingredient": cmd_ingredient,
    "plan": cmd_plan,
    "catalog": cmd_catalog,
    "cache": cmd_cache,
}


def main(argv: list[str] | None = None) -> int:
    parser = _parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    design_output = args.command in ("construct", "ingredient")
    if args.format is None and not design_output:
        args.format = "text"
    try:
        return COMMANDS[args.command](args)
    except _Usage as exc:
        parser.print_usage(sys.stderr)
        _note(f"error: {exc}")
        return EXIT_USAGE
    except Inadmissible as err:
        return _failure(args, err)


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
