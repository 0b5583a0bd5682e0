"""Experiment orchestration: per-trial estimate reports and their aggregate."""
from __future__ import annotations

import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from importlib import resources

import numpy as np

from .access_oracle import QUERY_KINDS, AccessModel, ModelKind, Oracle
from .errors import ConfigError
from .generators import gen_instance
from .graph_core import Graph, read_edge_list
from .rng import derive_seed


@dataclass
class EstimateReport:
    algo: str
    params: dict
    estimate: float | None
    truth: float | None
    rel_error: float | None
    queries: dict
    vertices_touched: int
    wall_ms: float
    extra: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return asdict(self)


def _truth_edges(g: Graph) -> float:
    return float(g.m)


def _truth_triangles(g: Graph) -> float:
    from .triangle_counter import exact_triangle_count
    return float(exact_triangle_count(g))


def _run_sampling(o, p):
    from .edge_counter import count_by_sampling
    return count_by_sampling(o, p["eps"], p.get("delta", 1 / 3), p.get("advice")), {}


def _run_direct(o, p):
    from .edge_counter import count_direct_run
    r = count_direct_run(o, p["eps"], p.get("advice") or o.graph.m)
    return r.estimate, {"theta": r.theta, "theta_clamped": r.theta_clamped}


def _run_pairs(o, p):
    from .edge_counter import count_pair_queries_run
    r = count_pair_queries_run(o, p["eps"], p.get("advice") or o.graph.m)
    return r.estimate, {"failed": r.failed}


def _run_count_edges(algo):
    def run(o, p):
        from .edge_counter import count_edges
        r = count_edges(o, p["eps"], algo)
        return r.estimate, {"advice": r.advice, "confident": r.confident, "runs": r.runs}
    return run


def _run_sample_edge(o, p):
    from .single_edge_sampler import sample_edges
    e = sample_edges(o, p["eps"], int(p.get("count", 1)), p.get("advice"))
    return None, {"samples": len(e)}


def _run_tri_edge(o, p):
    from .triangle_counter import tri_count_edge_sampling
    r = tri_count_edge_sampling(o, p["eps"], p["advice"], p.get("m"))
    return r.estimate, {"branch": r.algo, "rounds": r.rounds}


def _run_tri_vertex(o, p):
    from .triangle_counter import tri_count_vertex_sampling
    r = tri_count_vertex_sampling(o, p["eps"], p["advice"], p.get("m"),
                                  force_vertex_sampling=bool(p.get("force_vertex_sampling", False)))
    return r.estimate, {"branch": r.algo, "flags": r.flags}


def _run_count_triangles(o, p):
    from .triangle_counter import count_triangles
    r = count_triangles(o, p["eps"], p.get("algo", "auto"))
    return r.estimate, {"branch": r.algo, "exact": r.exact}


_H = ModelKind.HASH_ORDERED
_I = ModelKind.INDEXED
_P = ModelKind.INDEXED_PAIRS
_F = ModelKind.FULL_NEIGHBORHOOD
_B = ModelKind.BATCHED

# name -> (runner, models it accepts, ground truth)
ALGORITHMS = {
    "count-sampling": (_run_sampling, {_H, _I, _P, _F, _B}, _truth_edges),
    "count-direct": (_run_direct, {_H, _I, _P, _F, _B}, _truth_edges),
    "count-pairs": (_run_pairs, {_P, _H}, _truth_edges),
    "count-edges-direct": (_run_count_edges("direct"), {_H, _I, _P, _F, _B}, _truth_edges),
    "count-edges-pairs": (_run_count_edges("pairs"), {_P, _H}, _truth_edges),
    "sample-edge": (_run_sample_edge, {_H, _I, _P}, None),
    "tri-edge": (_run_tri_edge, {_F}, _truth_triangles),
    "tri-vertex": (_run_tri_vertex, {_F}, _truth_triangles),
    "count-triangles": (_run_count_triangles, {_F}, _truth_triangles),
}


def valid_pairs() -> list[str]:
    return sorted(f"{a}@{m.value}" for a, (_, models, _) in ALGORITHMS.items() for m in models)


def _model(spec: dict) -> AccessModel:
    name = spec.get("model", "hash_ordered")
    try:
        kind = ModelKind(name)
    except ValueError:
        raise ConfigError(f"unknown model {name!r}; valid pairs: {', '.join(valid_pairs())}") from None
    return AccessModel(kind, random_edge=bool(spec.get("random_edge", False)),
                       shuffle_seed=spec.get("shuffle_seed"))


def load_graph(graph_spec: dict) -> tuple[Graph, dict]:
    if "path" in graph_spec:
        return read_edge_list(graph_spec["path"]), {"path": graph_spec["path"]}
    kw = {k: v for k, v in graph_spec.items() if k not in ("family", "seed")}
    try:
        inst = gen_instance(graph_spec["family"], seed=graph_spec.get("seed"), **kw)
    except KeyError as exc:
        raise ConfigError(f"graph spec missing field {exc}") from None
    return inst.graph, inst.params


def _trial(args) -> dict:
    spec, graph, index, truth = args
    algo = spec["algo"]
    runner = ALGORITHMS[algo][0]
    params = dict(spec.get("params", {}))
    seed = derive_seed(int(spec.get("seed", 0)), index)
    oracle = Oracle(graph, _model(spec), seed=seed)
    t0 = time.perf_counter()
    est, extra = runner(oracle, params)
    wall = (time.perf_counter() - t0) * 1000 if spec.get("record_time", True) else 0.0
    rel = None
    if truth is not None and est is not None:
        rel = abs(est - truth) / truth if truth else (0.0 if est == 0 else math.inf)
    params["seed"] = seed
    rep = EstimateReport(algo, params, None if est is None else float(est), truth, rel,
                         oracle.counters.to_dict(), int(oracle.vertices_touched), wall, extra)
    return rep.to_dict()


def aggregate(reports: list[dict], success_eps: float | None = None) -> dict:
    """Success rate, mean/variance of estimates and mean query counts; zeros when there are no trials."""
    est = np.array([r["estimate"] for r in reports if r["estimate"] is not None], dtype=float)
    finite = est[np.isfinite(est)]
    out = {
        "trials": len(reports),
        "mean_estimate": float(finite.mean()) if finite.size else 0.0,
        "var_estimate": float(finite.var(ddof=1)) if finite.size > 1 else 0.0,
        "mean_queries": {k: (float(np.mean([r["queries"][k] for r in reports])) if reports else 0.0)
                         for k in QUERY_KINDS + ("total",)},
        "success_rate": 0.0,
    }
    if success_eps is not None and reports:
        ok = [r["rel_error"] is not None and r["rel_error"] <= success_eps for r in reports]
        out["success_rate"] = float(np.mean(ok))
    return out


def run_experiment(spec: dict) -> dict:
    """Run `trials` independent trials; returns {"graph", "reports", "aggregate"}.

    Per-trial seeds are derived from the master seed and the trial index, so a
    trial can be reproduced alone and reports come back in index order.
    """
    algo = spec.get("algo")
    if algo not in ALGORITHMS:
        raise ConfigError(f"unknown algorithm {algo!r}; valid pairs: {', '.join(valid_pairs())}")
    model = _model(spec)
    if model.kind not in ALGORITHMS[algo][1]:
        raise ConfigError(f"{algo} does not run under {model.name}; valid pairs: {', '.join(valid_pairs())}")
    graph, gparams = load_graph(spec.get("graph", {}))
    truth_fn = ALGORITHMS[algo][2]
    truth = truth_fn(graph) if truth_fn is not None else None
    trials = int(spec.get("trials", 1))
    jobs = [(spec, graph, i, truth) for i in range(trials)]
    workers = int(spec.get("workers", 1))
    if workers > 1 and trials > 1:
        with ProcessPoolExecutor(workers) as pool:
            reports = list(pool.map(_trial, jobs))
    else:
        reports = [_trial(j) for j in jobs]
    return {"graph": {"n": graph.n, "m": graph.m, **_jsonable(gparams)},
            "reports": reports,
            "aggregate": aggregate(reports, spec.get("success_eps"))}


def _jsonable(d: dict) -> dict:
    return json.loads(json.dumps(d, default=lambda x: x.tolist() if hasattr(x, "tolist") else str(x)))


def report_schema() -> dict:
    return json.loads(resources.files(__package__).joinpath("report_schema.json").read_text())


def validate_output(doc: dict) -> None:
    """Raise jsonschema.ValidationError unless `doc` matches the experiment output schema."""
    import jsonschema
    jsonschema.validate(doc, report_schema())
