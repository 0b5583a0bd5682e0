"""Command-line entry point: generate graphs, run estimators, verify, benchmark."""
from __future__ import annotations

import argparse
import json
import sys
import time

import numpy as np

from .access_oracle import AccessModel, ModelKind, Oracle
from .errors import ConfigError, GraphError
from .graph_core import dump_edge_list, read_edge_list


def _emit(args, payload) -> None:
    text = payload if isinstance(payload, str) else json.dumps(payload, indent=2, default=_default) + "\n"
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _default(x):
    if hasattr(x, "tolist"):
        return x.tolist()
    if isinstance(x, float) and not np.isfinite(x):
        return str(x)
    raise TypeError(f"not serializable: {type(x).__name__}")


def _oracle(args, default_model: str) -> Oracle:
    g = read_edge_list(args.graph)
    model = AccessModel(ModelKind(args.model or default_model), random_edge=getattr(args, "random_edge", False))
    return Oracle(g, model, seed=args.seed)


def _report(algo, params, estimate, oracle, t0, truth=None, **extra) -> dict:
    rel = None
    if truth is not None and estimate is not None:
        rel = abs(estimate - truth) / truth if truth else 0.0
    return {"algo": algo, "params": params, "estimate": estimate, "truth": truth, "rel_error": rel,
            "queries": oracle.counters.to_dict(), "vertices_touched": int(oracle.vertices_touched),
            "wall_ms": (time.perf_counter() - t0) * 1000, "extra": extra}


def cmd_gen(args) -> None:
    from .generators import gen_instance
    kw = {k: getattr(args, k) for k in ("n", "m", "T", "s", "eps", "side", "ones") if getattr(args, k) is not None}
    if args.x is not None:
        kw["x"] = [int(c) for c in args.x]
    inst = gen_instance(args.family, seed=args.seed, **kw)
    _emit(args, dump_edge_list(inst.graph))
    info = {"family": inst.family, **inst.params, "flags": inst.flags}
    sys.stderr.write(json.dumps(info, default=_default) + "\n")


def cmd_sample_edge(args) -> None:
    from .single_edge_sampler import sample_edge
    o = _oracle(args, "indexed")
    t0 = time.perf_counter()
    e = sample_edge(o, args.eps, args.advice)
    _emit(args, _report("sample-edge", {"eps": args.eps, "advice": args.advice, "seed": args.seed},
                        None, o, t0, edge=[e.src, e.dst]))


def cmd_sample_edges(args) -> None:
    from . import multi_edge_sampler as mes
    from .single_edge_sampler import sample_edges
    o = _oracle(args, "hash_ordered")
    t0 = time.perf_counter()
    if args.mode == "walk":
        edges = sample_edges(o, args.eps, args.count, args.advice)
    elif args.mode == "wr":
        edges = mes.sample_with_replacement(o, args.count, args.delta, args.advice)
    elif args.mode == "wor":
        edges = mes.sample_without_replacement(o, args.count, args.delta, args.advice)
    else:
        edges = mes.bernoulli_samples(o, args.p, 1, args.delta, args.advice)[0].edges
    params = {"mode": args.mode, "count": args.count, "eps": args.eps, "delta": args.delta,
              "p": args.p, "advice": args.advice, "seed": args.seed}
    _emit(args, _report("sample-edges", params, None, o, t0, edges=np.asarray(edges).tolist()))


def cmd_count_edges(args) -> None:
    from . import edge_counter as ec
    default = "indexed_pairs" if args.algo == "pairs" else "hash_ordered"
    o = _oracle(args, default)
    t0 = time.perf_counter()
    extra = {}
    if args.algo == "sampling":
        est = ec.count_by_sampling(o, args.eps, args.delta, args.advice)
    elif args.advice is None:
        r = ec.count_edges(o, args.eps, args.algo)
        est = r.estimate
        extra = {"advice_found": r.advice, "confident": r.confident, "runs": r.runs}
    elif args.algo == "direct":
        est = ec.count_direct(o, args.eps, args.advice)
    else:
        est = ec.count_pair_queries(o, args.eps, args.advice)
        extra = {"failed": est is None}
    params = {"eps": args.eps, "delta": args.delta, "advice": args.advice, "seed": args.seed}
    truth = float(o.graph.m) if args.truth else None
    _emit(args, _report(f"count-edges/{args.algo}", params, est, o, t0, truth, **extra))


def cmd_count_triangles(args) -> None:
    from . import triangle_counter as tc
    o = _oracle(args, "full_neighborhood")
    t0 = time.perf_counter()
    if args.advice is None:
        r = tc.count_triangles(o, args.eps, args.algo)
        est, extra = r.estimate, {"branch": r.algo, "exact": r.exact, "advice_found": r.advice}
    else:
        if args.algo == "edge":
            r = tc.tri_count_edge_sampling(o, args.eps, args.advice, args.m)
        else:
            r = tc.tri_count_vertex_sampling(o, args.eps, args.advice, args.m)
        est, extra = r.estimate, {"branch": r.algo, "flags": r.flags}
    params = {"eps": args.eps, "advice": args.advice, "seed": args.seed}
    truth = float(tc.exact_triangle_count(o.graph)) if args.truth else None
    _emit(args, _report("count-triangles", params, est, o, t0, truth, **extra))


def cmd_verify(args) -> None:
    from .bruteforce_oracle import exact_triangle_stats, out_degrees
    g = read_edge_list(args.graph)
    stats = exact_triangle_stats(g)
    d_out = out_degrees(g)
    _emit(args, {
        "n": g.n, "m": g.m, "triangles": stats.T,
        "max_degree": int(g.degrees.max()) if g.n else 0,
        "assignment_conserved": int(stats.t_plus.sum()) == stats.T,
        "out_degree_sum_is_m": int(d_out.sum()) == g.m,
        "max_out_degree": int(d_out.max()) if g.n else 0,
    })


def cmd_bench(args) -> None:
    from .experiments import run_experiment, validate_output
    with open(args.config, encoding="utf-8") as fh:
        spec = json.load(fh)
    for key in ("trials", "seed", "workers"):
        if getattr(args, key) is not None:
            spec[key] = getattr(args, key)
    doc = run_experiment(spec)
    validate_output(json.loads(json.dumps(doc, default=_default)))
    _emit(args, doc)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="sublinear-graphs", description=__doc__)
    sub = p.add_subparsers(dest="cmd", required=True)

    def common(sp, graph=True):
        if graph:
            sp.add_argument("--graph", required=True, help="edge-list file")
            sp.add_argument("--model", choices=[k.value for k in ModelKind])
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--out", help="write output here instead of stdout")

    g = sub.add_parser("gen", help="generate a graph as an edge list")
    g.add_argument("--family", required=True,
                   choices=["er", "complete", "star", "cycle", "cliques-plus-independent", "chunks", "sections"])
    g.add_argument("--n", type=int)
    g.add_argument("--m", type=int)
    g.add_argument("--T", type=int)
    g.add_argument("--s", type=int)
    g.add_argument("--eps", type=float)
    g.add_argument("--side", choices=["low", "high"])
    g.add_argument("--x", help="section bits, e.g. 0010")
    g.add_argument("--ones", type=int, help="number of random set bits for sections")
    common(g, graph=False)
    g.set_defaults(func=cmd_gen)

    s = sub.add_parser("sample-edge", help="one near-uniform edge")
    s.add_argument("--eps", type=float, default=0.25)
    s.add_argument("--advice", type=float)
    common(s)
    s.set_defaults(func=cmd_sample_edge)

    s = sub.add_parser("sample-edges", help="many edges: walk, wr, wor or bernoulli")
    s.add_argument("--mode", choices=["walk", "wr", "wor", "bernoulli"], default="wr")
    s.add_argument("--count", type=int, default=1)
    s.add_argument("--eps", type=float, default=0.25)
    s.add_argument("--delta", type=float, default=0.1)
    s.add_argument("--p", type=float, default=0.1)
    s.add_argument("--advice", type=float)
    common(s)
    s.set_defaults(func=cmd_sample_edges)

    c = sub.add_parser("count-edges", help="estimate the number of edges")
    c.add_argument("--algo", choices=["sampling", "direct", "pairs"], default="direct")
    c.add_argument("--eps", type=float, default=0.2)
    c.add_argument("--delta", type=float, default=1 / 3)
    c.add_argument("--advice", type=float)
    c.add_argument("--truth", action="store_true", help="include the exact count and relative error")
    common(c)
    c.set_defaults(func=cmd_count_edges)

    t = sub.add_parser("count-triangles", help="estimate the number of triangles")
    t.add_argument("--algo", choices=["edge", "vertex", "auto"], default="auto")
    t.add_argument("--eps", type=float, default=0.4)
    t.add_argument("--advice", type=float)
    t.add_argument("--m", type=float, help="edge count used by the estimators (estimated if omitted)")
    t.add_argument("--random-edge", action="store_true", help="allow random-edge queries")
    t.add_argument("--truth", action="store_true")
    common(t)
    t.set_defaults(func=cmd_count_triangles)

    v = sub.add_parser("verify", help="brute-force statistics of a graph")
    v.add_argument("--graph", required=True)
    v.add_argument("--out")
    v.set_defaults(func=cmd_verify)

    b = sub.add_parser("bench", help="run an experiment config (JSON)")
    b.add_argument("--config", required=True)
    b.add_argument("--trials", type=int)
    b.add_argument("--seed", type=int)
    b.add_argument("--workers", type=int)
    b.add_argument("--out")
    b.set_defaults(func=cmd_bench)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except (GraphError, ConfigError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
