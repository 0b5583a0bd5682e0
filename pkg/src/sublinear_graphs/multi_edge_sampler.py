"""Bernoulli, without-replacement and with-replacement edge sampling."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .access_oracle import ensure_hash_ordered
from .biased_sampler import BiasedSamplerState, draw_sample, inclusion_probability, preprocess
from .errors import ContractError, DomainError, EmptyGraphError, ParameterError, UnsatisfiableError
from .graph_core import DirectedEdge

DENSE_THRESHOLD = 0.9
SMALL_BATCH = 32


@dataclass(frozen=True)
class BernoulliPlan:
    p: float
    t: int
    theta: int
    delta: float

    @property
    def dense(self) -> bool:
        return self.p > DENSE_THRESHOLD

    @classmethod
    def make(cls, n: int, p: float, t: int, delta: float) -> "BernoulliPlan":
        if not 0 < p <= 1:
            raise ParameterError(f"p must lie in (0, 1], got {p}")
        if t < 1:
            raise ParameterError(f"t must be >= 1, got {t}")
        if n < 2:
            return cls(p, t, 1, delta)
        raw = math.sqrt(math.log(n) * math.log(n / delta) / (p * t))
        return cls(p, t, max(1, math.ceil(raw)), delta)


class EdgeSampleSet:
    """A set of directed edges stored as a (k, 2) array.

    The samplers never produce repeats, so rows are not re-deduplicated here.
    """

    __slots__ = ("edges", "provenance")

    def __init__(self, edges, provenance: str = "merged"):
        self.edges = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
        self.provenance = provenance

    def __len__(self) -> int:
        return len(self.edges)

    def __iter__(self):
        for u, v in self.edges.tolist():
            yield DirectedEdge(u, v)

    def __contains__(self, e) -> bool:
        u, v = e
        return bool(np.any((self.edges[:, 0] == u) & (self.edges[:, 1] == v)))

    def as_set(self) -> set:
        return set(map(tuple, self.edges.tolist()))

    def __repr__(self) -> str:
        return f"EdgeSampleSet({len(self)} edges, {self.provenance})"

    @classmethod
    def union(cls, a: "EdgeSampleSet", b: "EdgeSampleSet") -> "EdgeSampleSet":
        return cls(np.concatenate([a.edges, b.edges]), "merged")


def wor_from_universe(u: int, k: int, rng) -> np.ndarray:
    """Uniform k-subset of [0, u) by rejection, taking the complement when k > u/2. Sorted."""
    if k < 0 or u < 0:
        raise DomainError("sizes must be non-negative")
    if k > u:
        raise DomainError(f"cannot draw {k} distinct items from {u}")
    if 2 * k > u:
        drop = set(_rejection_subset(u, u - k, rng))
        return np.array([i for i in range(u) if i not in drop], dtype=np.int64)
    return np.sort(np.fromiter(_rejection_subset(u, k, rng), dtype=np.int64, count=k))


def _rejection_subset(u: int, k: int, rng) -> set:
    chosen: set = set()
    while len(chosen) < k:
        chosen.add(int(rng.integers(u)))
    return chosen


def _binomial_at_least_one(d: int, p: float, rng) -> int:
    """Binomial(d, p) conditioned on being >= 1: first success index J, then 1 + Bin(d - J, p)."""
    if p >= 1:
        return d
    # J is geometric truncated to [1, d]: invert the conditional cdf
    q = 1.0 - p
    u = rng.random()
    tail = -math.expm1(d * math.log1p(-p))  # P(at least one success)
    j = math.ceil(math.log1p(-u * tail) / math.log(q)) if q > 0 else 1
    j = min(max(j, 1), d)
    return 1 + int(rng.binomial(d - j, p))


def sample_light_edges(oracle, theta: int, p: float, rng=None) -> EdgeSampleSet:
    """Each directed edge with a light source (degree < theta) kept independently with rate p."""
    if p > DENSE_THRESHOLD:
        raise ContractError("p > 0.9 must use the dense path")
    rng = oracle.rng if rng is None else rng
    n = oracle.n
    k = int(rng.binomial(n * theta, p)) if n else 0
    if k == 0:
        return EdgeSampleSet(np.zeros((0, 2)), "light")
    if k <= SMALL_BATCH:
        vs, li = _distinct_pairs_small(oracle, theta, k, rng)
    else:
        vs, li = _distinct_pairs(oracle, theta, k, rng)
    uv, inv = np.unique(vs, return_inverse=True)
    d = oracle.degrees(uv)[inv]
    ok = (d < theta) & (li <= d)
    w = oracle.ith_neighbors(vs[ok], li[ok])
    return EdgeSampleSet(np.stack([vs[ok], w], axis=1), "light")


def _distinct_pairs_small(oracle, theta, k, rng):
    seen = set()
    vs = []
    li = []
    # draw (v, l) pairs; repeated pairs are thrown back and redrawn
    while len(vs) < k:
        v = int(oracle.random_vertices(1)[0])
        j = int(rng.integers(1, theta + 1))
        if (v, j) in seen:
            continue
        seen.add((v, j))
        vs.append(v)
        li.append(j)
    return np.array(vs, dtype=np.int64), np.array(li, dtype=np.int64)


def _distinct_pairs(oracle, theta, k, rng):
    # batched form of the redraw loop: keep first occurrences of unseen pairs
    taken = np.zeros(0, dtype=np.int64)
    vs_all = []
    idx_all = []
    while len(taken) < k:
        need = k - len(taken)
        v = oracle.random_vertices(need)
        li = rng.integers(1, theta + 1, size=need)
        code = v * theta + (li - 1)
        _, first = np.unique(code, return_index=True)
        first = np.sort(first)
        fresh = first[~np.isin(code[first], taken)]
        taken = np.concatenate([taken, code[fresh]])
        vs_all.append(v[fresh])
        idx_all.append(li[fresh])
    return np.concatenate(vs_all), np.concatenate(idx_all)


def sample_heavy_edges(state: BiasedSamplerState, theta: int, p: float, rng=None) -> EdgeSampleSet:
    """Each directed edge with a heavy source kept independently with rate p (under the success event)."""
    if p > DENSE_THRESHOLD:
        raise ContractError("p > 0.9 must use the dense path")
    if state.theta != theta:
        raise ContractError("sampler state was preprocessed with a different threshold")
    oracle = state.oracle
    rng = oracle.rng if rng is None else rng
    p_n = min(1.0, 2 * theta * p)
    S = draw_sample(state, p_n, rng)
    if S.size == 0:
        return EdgeSampleSet(np.zeros((0, 2)), "heavy")
    d = state.known_degree(S)
    heavy = d >= theta
    S, d = S[heavy], d[heavy]
    incl = inclusion_probability(d, theta, p_n)
    keep_p = -np.expm1(d * math.log1p(-p)) / incl
    assert np.all(keep_p <= 1 + 1e-9), "rejection ratio above one"
    keep = rng.random(len(S)) < keep_p
    src_parts = []
    idx_parts = []
    for v, dv in zip(S[keep].tolist(), d[keep].tolist()):
        k = _binomial_at_least_one(dv, p, rng)
        idx = wor_from_universe(dv, k, rng) + 1
        src_parts.append(np.full(k, v, dtype=np.int64))
        idx_parts.append(idx)
    if not src_parts:
        return EdgeSampleSet(np.zeros((0, 2)), "heavy")
    src = np.concatenate(src_parts)
    idx = np.concatenate(idx_parts)
    dst = oracle.ith_neighbors(src, idx)
    return EdgeSampleSet(np.stack([src, dst], axis=1), "heavy")


def _read_all_edges(oracle) -> np.ndarray:
    """Dense path: read every neighbor list (cost n degree queries plus 2m neighbor queries)."""
    n = oracle.n
    vs = np.arange(n)
    d = oracle.degrees(vs)
    src = np.repeat(vs, d)
    idx = np.concatenate([np.arange(1, x + 1) for x in d.tolist()]) if n else np.zeros(0, dtype=np.int64)
    dst = oracle.ith_neighbors(src, idx) if len(src) else np.zeros(0, dtype=np.int64)
    return np.stack([src, dst], axis=1)


def bernoulli_samples(oracle, p: float, t: int, delta: float, m_advice: float | None = None,
                      rng=None) -> list[EdgeSampleSet]:
    """t independent sets, each containing every directed edge independently with rate p.

    Uses one shared preprocessing for all t rounds; p > 0.9 reads the whole graph.
    Models without hashes are served through simulate_hash_order.
    """
    plan = BernoulliPlan.make(oracle.n, p, t, delta)
    rng = oracle.rng if rng is None else rng
    if oracle.n < 2:
        return [EdgeSampleSet(np.zeros((0, 2)), "merged") for _ in range(t)]
    ho = ensure_hash_ordered(oracle)
    if plan.dense:
        all_edges = _read_all_edges(ho)
        out = []
        for _ in range(t):
            mask = rng.random(len(all_edges)) < p if p < 1 else np.ones(len(all_edges), dtype=bool)
            out.append(EdgeSampleSet(all_edges[mask], "merged"))
        return out
    state = preprocess(ho, plan.theta, delta, m_advice)
    out = []
    for _ in range(t):
        light = sample_light_edges(ho, plan.theta, p, rng)
        heavy = sample_heavy_edges(state, plan.theta, p, rng)
        out.append(EdgeSampleSet.union(light, heavy))
    return out


def _lg(n: int) -> float:
    if n < 2:
        raise ParameterError("escalating samplers need n >= 2")
    return math.log2(n)


def sample_without_replacement(oracle, s: int, delta: float, m_advice: float | None = None,
                               rng=None) -> np.ndarray:
    """s distinct directed edges, uniform among all s-subsets, in random order; (s, 2) array."""
    rng = oracle.rng if rng is None else rng
    if s == 0:
        return np.zeros((0, 2), dtype=np.int64)
    if oracle.n < 2:
        raise UnsatisfiableError(f"cannot draw {s} edges from an edgeless graph")
    budget = delta / (3 * _lg(oracle.n))
    ho = ensure_hash_ordered(oracle)
    p = 1.0 / oracle.n**2
    while True:
        pc = min(1.0, p)
        S = bernoulli_samples(ho, pc, 1, budget, m_advice, rng)[0]
        if len(S) >= s:
            pick = rng.permutation(len(S))[:s]
            return S.edges[pick]
        if pc >= 1:
            raise UnsatisfiableError(f"requested {s} edges but the graph has {len(S)} directed edges")
        p *= 2


def sample_with_replacement(oracle, s: int, delta: float, m_advice: float | None = None,
                            rng=None) -> np.ndarray:
    """s independent uniform directed edges; (s, 2) array."""
    rng = oracle.rng if rng is None else rng
    if s < 1:
        raise ParameterError("s must be >= 1")
    if oracle.n < 2:
        raise EmptyGraphError("graph has no edges")
    budget = delta / (3 * _lg(oracle.n))
    ho = ensure_hash_ordered(oracle)
    p = 1.0 / oracle.n**2
    while True:
        pc = min(1.0, p)
        sets = bernoulli_samples(ho, pc, 2 * s, budget, m_advice, rng)
        picks = [S.edges[rng.integers(len(S))] for S in sets if len(S)]
        if len(picks) >= s:
            order = rng.permutation(len(picks))[:s]
            return np.asarray(picks, dtype=np.int64)[order]
        if pc >= 1:
            raise EmptyGraphError("graph has no edges")
        p *= 2
