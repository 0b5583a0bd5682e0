"""Compiled vs pure-Python kernel timings.

    python benchmarks/bench_kernels.py [--repeat 3] [--json]

Both backends get identical inputs and seeds, and their outputs are checked
for equality before any timing is reported.
"""
from __future__ import annotations

import argparse
import json
import time

import numpy as np

from sublinear_graphs import kernels
from sublinear_graphs.generators import clique_with_padding, gen_er


def _best(fn, repeat):
    best = float("inf")
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def cases():
    g = gen_er(2000, 8000, 1)
    theta = int(np.ceil(np.sqrt(2 * g.m)))
    tri = clique_with_padding(30, 3000, 2000)
    tslot = kernels.backend("python").slot_triangles(tri.indptr, tri.indices)
    slots = np.random.default_rng(0).integers(0, 2 * tri.m, size=20000)
    heavy = np.zeros(0, dtype=np.uint8)

    def walk(mod):
        counts = np.zeros(2 * g.m, dtype=np.int64)
        res = mod.walk_attempts(g.indptr, g.indices, theta, 5, 0, 200_000, 7, counts)
        return res, counts.sum()

    def samples(mod):
        out = np.empty(2000, dtype=np.int64)
        res = mod.walk_samples(g.indptr, g.indices, theta, 5, 2000, 10**9, 7, out)
        return res, out.tolist()

    def triangles(mod):
        return mod.slot_triangles(tri.indptr, tri.indices).tolist()

    def rounds(mod):
        fetched = np.zeros(tri.n, dtype=np.uint8)
        return mod.tri_rounds(tri.indptr, tri.indices, tri.slot_sources, tslot, slots, heavy, fetched, 11)

    return {"walk_attempts": walk, "walk_samples": samples, "slot_triangles": triangles, "tri_rounds": rounds}


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--json", action="store_true")
    args = ap.parse_args(argv)
    try:
        fast = kernels.backend("cython")
    except ImportError:
        print("compiled extension not built; run `pip install -e . --no-build-isolation` first")
        return 1
    slow = kernels.backend("python")
    rows = []
    for name, fn in cases().items():
        tc, oc = _best(lambda: fn(fast), args.repeat)
        tp, op = _best(lambda: fn(slow), 1)
        if repr(oc) != repr(op):
            raise SystemExit(f"{name}: backends disagree")
        rows.append({"kernel": name, "cython_s": tc, "python_s": tp, "speedup": tp / tc if tc else float("inf")})
    if args.json:
        print(json.dumps(rows, indent=2))
    else:
        print(f"{'kernel':<16}{'cython s':>12}{'python s':>12}{'speedup':>10}")
        for r in rows:
            print(f"{r['kernel']:<16}{r['cython_s']:>12.4f}{r['python_s']:>12.4f}{r['speedup']:>9.0f}x")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
