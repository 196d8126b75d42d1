"""Compare the numba kernels with their fallbacks.

    python benchmarks/bench_kernels.py [--repeat N]

Coverage counting is timed on a built S(3,K4+e,52) tiled to about a million
blocks; exact cover on the v=6 nonexistence search and an SQS(14) search.
Run with QUINTIC_NUMBA=0 to check that the fallback path alone works.
"""
from __future__ import annotations

import argparse
import time
from math import comb

import numpy as np

from quintic import _accel
from quintic.core import IngredientSpec
from quintic.pipeline import Registry
from quintic.search import design_instance, exact_cover, k4e_copies, _k4e_edge_codes, CoverInstance
from quintic.verify import _count_k4e_numba, _count_k4e_numpy


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    print(f"numba active: {_accel.USE_NUMBA}")

    doc, _ = Registry().build(52)
    arr = np.tile(doc.block_array(), (240, 1))
    n = comb(52, 3)
    kernels = {"numpy": _count_k4e_numpy}
    if _accel.USE_NUMBA:
        kernels["numba"] = _count_k4e_numba
        _count_k4e_numba(arr[:10], np.zeros(n, np.int64))  # compile
    ref = None
    print(f"\ncoverage count, {len(arr)} blocks")
    for name, k in kernels.items():
        t, out = best_of(lambda: k(arr, np.zeros(n, np.int64)), args.repeat)
        ref = out if ref is None else ref
        assert np.array_equal(out, ref)
        print(f"  {name:<6} {t * 1e3:9.1f} ms")

    blocks = k4e_copies(range(6))
    codes = _k4e_edge_codes(blocks)
    cases = {
        "nonexistence v=6": (CoverInstance(list(range(20)), list(zip(map(tuple, blocks.tolist()), codes.tolist()))), None),
        "SQS(14)": (design_instance(IngredientSpec("S", "COMPLETE", 14, sizes=(4,)))[0], 1),
    }
    backends = ["python"] + (["numba"] if _accel.USE_NUMBA else [])
    for title, (inst, limit) in cases.items():
        print(f"\nexact cover, {title}: {len(inst.universe)} columns, {len(inst.candidates)} rows")
        nodes = set()
        for b in backends:
            exact_cover(inst, limit=limit, backend=b)  # warm up / compile
            t, res = best_of(lambda: exact_cover(inst, limit=limit, backend=b), args.repeat)
            nodes.add(res.nodes)
            print(f"  {b:<6} {t * 1e3:9.1f} ms  nodes={res.nodes} solutions={res.count}")
        assert len(nodes) == 1, "backends disagree on the search tree"


if __name__ == "__main__":
    main()
