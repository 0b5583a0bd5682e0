"""Triangle counting with full neighborhood access.

Every triangle is assigned to its minimal edge under the order
(t(e), canonical id), where t(e) is the number of triangles through e. The
estimators sample edges, pick a uniform third vertex w, and credit t(uv) when
uv is the assigned edge, which happens with probability t+(uv)/t(uv).

Neighborhood reads go through a NeighborhoodReader, so each vertex is charged
once per run no matter how often its neighborhood is consulted.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .access_oracle import HashOrderSimulator, NeighborhoodReader, ensure_hash_ordered
from .edge_counter import AdviceResult, count_by_sampling, remove_advice
from .errors import ContractError, DomainError, ParameterError
from .rng import draw_seed

EDGE_ROUNDS_C = 138
HEAVY_EDGES_C = 432
# low/high split of the light-pair loop, in units of ln(n) / eps^2
SPLIT_C = 162
HEAVY_WRT_S_C = 8
SAMPLE_S_C = 16
# overshoot constant for advice removal: Markov on an unbiased estimator
TRIANGLE_OVERSHOOT = 3
EDGE_SOURCE_DELTA = 1 / 12


def slot_triangle_counts(graph) -> np.ndarray:
    """t(uv) for every directed slot of the id-sorted CSR."""
    return graph.cached("slot_triangles", lambda: kernels.slot_triangles(graph.indptr, graph.indices))


def exact_triangle_count(graph) -> int:
    return int(slot_triangle_counts(graph).sum() // 6)


def _reader(source) -> NeighborhoodReader:
    if isinstance(source, NeighborhoodReader):
        return source
    if isinstance(source, HashOrderSimulator):
        return source.reader
    return NeighborhoodReader(source)


def edge_triangle_count(source, u: int, v: int) -> int:
    """|N(u) & N(v)| for the edge uv, reading at most the two neighborhoods."""
    reader = _reader(source)
    nu = reader.fetch(u)
    i = np.searchsorted(nu, v)
    if i >= len(nu) or nu[i] != v:
        raise DomainError(f"({u}, {v}) is not an edge")
    reader.fetch(v)
    g = reader.graph
    return int(slot_triangle_counts(g)[g.slot_of(u, v)])


def _key(reader: NeighborhoodReader, u: int, v: int) -> tuple[int, int]:
    # t(uv) from cached rows; callers guarantee both are fetched
    g = reader.graph
    a, b = min(u, v), max(u, v)
    return int(slot_triangle_counts(g)[g.slot_of(a, b)]), a * g.n + b


def edge_precedes(source, e1, e2) -> bool:
    """e1 before e2 in the (t, id) edge order.

    `source` is a brute-force TriangleStats or anything a NeighborhoodReader can
    be built from; in the latter case the endpoints are read (and charged).
    """
    if hasattr(source, "precedes"):
        return bool(source.precedes(tuple(e1), tuple(e2)))
    reader = _reader(source)
    k1 = (edge_triangle_count(reader, *e1), min(e1) * reader.graph.n + max(e1))
    k2 = (edge_triangle_count(reader, *e2), min(e2) * reader.graph.n + max(e2))
    return k1 < k2


def assigned_count_restricted(reader: NeighborhoodReader, u: int, v: int, S) -> int:
    """Triangles assigned to uv whose third vertex lies in S, from already-read neighborhoods only."""
    S = np.asarray(S, dtype=np.int64)
    need = np.concatenate([[u, v], S])
    if not np.all(reader.fetched[need]):
        raise ContractError("assigned_count_restricted needs u, v and S already read")
    g = reader.graph
    common = np.intersect1d(g.neighbors(u), g.neighbors(v), assume_unique=True)
    ws = np.intersect1d(common, S)
    if ws.size == 0:
        return 0
    kuv = _key(reader, u, v)
    return sum(1 for w in ws.tolist() if kuv < _key(reader, u, w) and kuv < _key(reader, v, w))


def _assigned_to(reader: NeighborhoodReader, u: int, v: int, w: int) -> bool:
    kuv = _key(reader, u, v)
    return kuv < _key(reader, u, w) and kuv < _key(reader, v, w)


@dataclass
class TriangleRun:
    estimate: float
    algo: str
    rounds: int = 0
    flags: list = field(default_factory=list)
    light_part: float = 0.0
    heavy_part: float = 0.0


class _EdgeSource:
    """Uniform directed edges as id-sorted slots: native random-edge queries or sampled by the multi-edge sampler."""

    def __init__(self, oracle, rng, reader: NeighborhoodReader | None = None):
        self.oracle = oracle
        self.graph = oracle.graph
        self.native = oracle.allows("random_edge")
        if self.native:
            self.reader = NeighborhoodReader(oracle) if reader is None else reader
            self.sim = None
        else:
            self.sim = HashOrderSimulator(oracle, draw_seed(rng))
            if reader is not None:
                self.sim.reader = reader
            self.reader = self.sim.reader

    def slots(self, k: int) -> np.ndarray:
        if k == 0:
            return np.zeros(0, dtype=np.int64)
        if self.native:
            return self.oracle.random_edge_slots(k)
        from .multi_edge_sampler import sample_with_replacement
        e = sample_with_replacement(self.sim, k, EDGE_SOURCE_DELTA)
        return np.asarray(self.graph.slot_of(e[:, 0], e[:, 1]), dtype=np.int64)


def _assignment_rounds(src: _EdgeSource, slots: np.ndarray, heavy: np.ndarray | None, rng) -> int:
    g = src.graph
    reader = src.reader
    before = reader.fetched.copy()
    mask = np.zeros(0, dtype=np.uint8) if heavy is None else heavy.astype(np.uint8)
    acc, _ = kernels.tri_rounds(g.indptr, g.indices, g.slot_sources, slot_triangle_counts(g),
                                np.ascontiguousarray(slots, dtype=np.int64), mask, reader.fetched,
                                draw_seed(rng))
    reader.settle(before)
    return int(acc)


def _resolve_m(oracle, m) -> tuple[float, list]:
    if m is not None:
        return float(m), []
    est = count_by_sampling(ensure_hash_ordered(oracle), 0.1, 0.05)
    return est, ["m estimated by edge counting"]


def edge_rounds(m: float, eps: float, t_advice: float) -> int:
    return max(1, math.ceil(EDGE_ROUNDS_C * m / (eps**2 * t_advice ** (2 / 3))))


def tri_count_edge_sampling(oracle, eps: float, t_advice: float, m: float | None = None,
                            rng=None, reader: NeighborhoodReader | None = None) -> TriangleRun:
    """Unbiased estimate m*A/k from k uniform edges, A summing t(uv) over assigned picks.

    Edges come from random-edge queries when the model has them, otherwise
    from sample_with_replacement over a simulated hash order. `m` is the edge
    count used in k and in the scaling; if omitted it is estimated first.
    A `reader` shared between runs makes already-read neighborhoods free.
    """
    if not 0 < eps < 1:
        raise DomainError(f"eps must lie in (0, 1), got {eps}")
    if t_advice < 1:
        raise ParameterError("triangle advice must be >= 1")
    rng = oracle.rng if rng is None else rng
    m, flags = _resolve_m(oracle, m)
    if m <= 0 or oracle.n < 3:
        return TriangleRun(0.0, "edge-sampling", 0, flags)
    k = edge_rounds(m, eps, t_advice)
    src = _EdgeSource(oracle, rng, reader)
    acc = _assignment_rounds(src, src.slots(k), None, rng)
    return TriangleRun(m * acc / k, "edge-sampling", k, flags)


@dataclass(frozen=True)
class VertexSamplingPlan:
    theta: float
    p_s: float
    p_v: float
    p_t: float
    p_n: float
    split: float
    gate: float
    k_heavy: int
    clamped: tuple

    @classmethod
    def make(cls, n: int, m: float, eps: float, t_advice: float) -> "VertexSamplingPlan":
        ln_n = math.log(n)
        theta = math.sqrt(m * t_advice / n)
        raw = {
            "p_s": SAMPLE_S_C * ln_n / math.sqrt(theta),
            "p_v": 100 * math.sqrt(ln_n) * theta / (eps**2 * t_advice),
            "p_t": theta * ln_n / t_advice,
            "p_n": theta * ln_n / (eps**2 * t_advice),
            "gate": eps**2 * t_advice**2 / theta**3,
        }
        clamped = tuple(sorted(name for name, x in raw.items() if x > 1))
        c = {name: min(1.0, x) for name, x in raw.items()}
        k = max(1, math.ceil(HEAVY_EDGES_C * m * (ln_n + 2) / (eps**2 * theta)))
        return cls(theta, c["p_s"], c["p_v"], c["p_t"], c["p_n"], SPLIT_C * ln_n / eps**2, c["gate"], k, clamped)


def _bernoulli_vertices(oracle, p: float, rng) -> np.ndarray:
    # each vertex independently with rate p; realized as Bin(n, p) distinct uniform vertices
    n = oracle.n
    k = n if p >= 1 else int(rng.binomial(n, p))
    if k == 0:
        return np.zeros(0, dtype=np.int64)
    if oracle.allows("random_vertex"):
        oracle.charge("random_vertex", k)
    return np.sort(rng.choice(n, size=k, replace=False))


def heavy_wrt(graph, S: np.ndarray, theta: float) -> np.ndarray:
    """Mask of vertices v with sum over u in S & N(v) of t(uv) >= 8 sqrt(theta) ln n."""
    in_s = np.zeros(graph.n, dtype=bool)
    in_s[S] = True
    hit = in_s[graph.indices]
    sums = np.bincount(graph.slot_sources[hit], weights=slot_triangle_counts(graph)[hit], minlength=graph.n)
    return sums >= HEAVY_WRT_S_C * math.sqrt(theta) * math.log(graph.n)


def delegates(n: int, m: float, t_advice: float) -> bool:
    """Whether the vertex-sampling estimator hands over to edge sampling for this advice."""
    return t_advice >= m**3 / (n**3 * math.log(n) ** 6)


def tri_count_vertex_sampling(oracle, eps: float, t_advice: float, m: float | None = None, rng=None,
                              force_vertex_sampling: bool = False,
                              reader: NeighborhoodReader | None = None) -> TriangleRun:
    """Light triangles from the subgraph induced by a vertex sample, heavy ones from uniform edges.

    When the advice is large relative to m^3/(n^3 ln^6 n) this hands over to
    tri_count_edge_sampling (reported as algo='edge-sampling') unless forced.
    Rates above one are clamped and listed in the run's flags.
    """
    if not 0 < eps < 1:
        raise DomainError(f"eps must lie in (0, 1), got {eps}")
    if t_advice < 1:
        raise ParameterError("triangle advice must be >= 1")
    rng = oracle.rng if rng is None else rng
    n = oracle.n
    m, flags = _resolve_m(oracle, m)
    if m <= 0 or n < 3:
        return TriangleRun(0.0, "vertex-sampling", 0, flags)
    if delegates(n, m, t_advice) and not force_vertex_sampling:
        run = tri_count_edge_sampling(oracle, eps, t_advice, m, rng, reader)
        run.flags = flags + run.flags
        return run
    plan = VertexSamplingPlan.make(n, m, eps, t_advice)
    flags += [f"clamped {name}" for name in plan.clamped]
    src = _EdgeSource(oracle, rng, reader)
    reader = src.reader
    g = oracle.graph

    S = _bernoulli_vertices(oracle, plan.p_s, rng)
    Sv = _bernoulli_vertices(oracle, plan.p_v, rng)
    St = _bernoulli_vertices(oracle, plan.p_t, rng)
    Nset = _bernoulli_vertices(oracle, plan.p_n, rng)
    for part in (S, Sv, St, Nset):
        reader.fetch_many(part)
    heavy = heavy_wrt(g, S, plan.theta)
    in_n = np.zeros(n, dtype=bool)
    in_n[Nset] = True

    # light part over edges of the induced subgraph on Sv
    in_v = np.zeros(n, dtype=bool)
    in_v[Sv] = True
    sel = in_v[g.slot_sources] & in_v[g.indices] & (g.slot_sources < g.indices)
    us, vs = g.slot_sources[sel], g.indices[sel]
    a_low = a_high = 0.0
    for u, v in zip(us.tolist(), vs.tolist()):
        if heavy[u] or heavy[v]:
            continue
        common = np.intersect1d(g.neighbors(u), g.neighbors(v), assume_unique=True)
        if assigned_count_restricted(reader, u, v, St) < plan.split:
            if rng.random() >= plan.gate or common.size == 0:
                continue
            w = int(common[rng.integers(common.size)])
            reader.fetch(w)
            if _assigned_to(reader, u, v, w):
                a_low += common.size / plan.gate
        else:
            pool = common[in_n[common]]
            if pool.size == 0:
                continue
            w = int(pool[rng.integers(pool.size)])
            if _assigned_to(reader, u, v, w):
                a_high += common.size
    light = (a_low + a_high) / plan.p_v**2

    # heavy part from uniform edges with a heavy endpoint
    acc = _assignment_rounds(src, src.slots(plan.k_heavy), heavy, rng)
    heavy_part = m * acc / plan.k_heavy
    return TriangleRun(light + heavy_part, "vertex-sampling", plan.k_heavy, flags, light, heavy_part)


@dataclass
class TriangleCount:
    estimate: float
    algo: str
    exact: bool
    advice: float | None = None
    runs: int = 0
    flags: list = field(default_factory=list)


def _read_everything(oracle, reader: NeighborhoodReader | None = None) -> int:
    reader = NeighborhoodReader(oracle) if reader is None else reader
    reader.fetch_many(np.arange(oracle.n))
    return exact_triangle_count(oracle.graph)


def projected_queries(n: int, m: float, eps: float, t_advice: float) -> float:
    """Rough neighborhood-read budget of one estimator run at this advice."""
    if delegates(n, m, t_advice):
        return 3 * edge_rounds(m, eps, t_advice)
    plan = VertexSamplingPlan.make(n, m, eps, t_advice)
    return n * (plan.p_s + plan.p_v + plan.p_t + plan.p_n) + 3 * plan.k_heavy


def count_triangles(oracle, eps: float, algo: str = "auto", rng=None, reps: int | None = None) -> TriangleCount:
    """Advice-free triangle estimate.

    Searches the advice down from n^3 around the chosen estimator. Whenever a
    round's projected neighborhood reads exceed n, it reads the whole graph
    instead (n full-neighborhood queries) and counts exactly.
    """
    if algo not in ("auto", "edge", "vertex"):
        raise ParameterError(f"unknown algorithm {algo!r}")
    rng = oracle.rng if rng is None else rng
    n = oracle.n
    if n < 3:
        return TriangleCount(0.0, "exact", True)
    # one simulator for the edge count, so its reads also serve the exact fallback
    sim = ensure_hash_ordered(oracle)
    m = count_by_sampling(sim, 0.1, 0.05)
    flags = ["m estimated by edge counting"]
    # every run and the exact fallback share one reader: a neighborhood is paid for once
    shared = sim.reader if isinstance(sim, HashOrderSimulator) else NeighborhoodReader(oracle)
    if m <= 0:
        return TriangleCount(0.0, "exact", True, flags=flags)
    from .edge_counter import amplification_reps
    reps = amplification_reps(n) if reps is None else reps
    branch = {"auto": "vertex-sampling", "vertex": "vertex-sampling", "edge": "edge-sampling"}[algo]

    class _Exact(Exception):
        pass

    def estimator(t_adv: float) -> float:
        # neighborhood reads are the unit that matters in this model
        if reps * projected_queries(n, m, eps, t_adv) > n:
            raise _Exact
        if algo == "edge":
            return tri_count_edge_sampling(oracle, eps, t_adv, m, rng, shared).estimate
        run = tri_count_vertex_sampling(oracle, eps, t_adv, m, rng, reader=shared)
        nonlocal branch
        branch = run.algo
        return run.estimate

    try:
        res: AdviceResult = remove_advice(estimator, float(n) ** 3, TRIANGLE_OVERSHOOT, n, reps)
    except _Exact:
        return TriangleCount(float(_read_everything(oracle, shared)), "exact", True, flags=flags)
    return TriangleCount(res.estimate, branch, False, res.advice, res.runs, flags)
