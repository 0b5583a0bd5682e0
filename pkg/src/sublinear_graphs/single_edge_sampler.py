"""Near-uniform single edge sampling by random walks of random length."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import AttemptCapError, DomainError, EmptyGraphError
from .graph_core import DirectedEdge
from .rng import draw_seed

DEFAULT_ATTEMPT_CAP = 10**9


@dataclass(frozen=True)
class WalkParams:
    theta: int
    ell: int
    eps: float

    @classmethod
    def from_advice(cls, m_advice: float, eps: float) -> "WalkParams":
        if not 0 < eps <= 0.5:
            raise DomainError(f"eps must lie in (0, 1/2], got {eps}")
        theta = max(1, math.ceil(math.sqrt(2 * m_advice)))
        ell = math.ceil(math.log2(1 / eps)) + 2
        return cls(theta, ell, eps)


def _native(oracle) -> bool:
    return getattr(oracle, "is_native", False)


def sampling_attempt(oracle, k: int, params: WalkParams, rng=None) -> DirectedEdge | None:
    """One walk attempt of length k through scalar oracle queries; None on failure."""
    if not 1 <= k <= params.ell:
        raise DomainError(f"walk length {k} outside [1, {params.ell}]")
    rng = oracle.rng if rng is None else rng
    theta = params.theta
    u = oracle.random_vertex()
    d = oracle.degree(u)
    if d >= theta:
        return None
    j = int(rng.integers(1, theta + 1))
    if d < j:
        return None
    prev, u = u, oracle.ith_neighbor(u, j)
    for _ in range(k - 1):
        d = oracle.degree(u)
        if d < theta:
            return None
        prev, u = u, oracle.ith_neighbor(u, int(rng.integers(1, d + 1)))
    return DirectedEdge(prev, u)


def _charge_walks(oracle, rv, deg, ith):
    oracle.charge("random_vertex", rv)
    oracle.charge("degree", deg)
    oracle.charge("ith_neighbor", ith)


def attempt_counts(oracle, params: WalkParams, n_attempts: int, k: int | None = None) -> np.ndarray:
    """Successes per directed edge over n_attempts attempts, indexed by id-sorted slot.

    Random length per attempt unless k is given. Queries are charged to the oracle.
    """
    oracle.require("random_vertex", "degree", "ith_neighbor")
    g = oracle.graph
    if g.n == 0:
        raise EmptyGraphError("no vertices")
    indptr, rows = oracle.kernel_view()
    counts = np.zeros(len(rows), dtype=np.int64)
    _, rv, deg, ith = kernels.walk_attempts(indptr, rows, params.theta, params.ell, 0 if k is None else k,
                                            int(n_attempts), draw_seed(oracle.rng), counts)
    _charge_walks(oracle, rv, deg, ith)
    # kernel slots follow the model's neighbour order; map back to id order
    if rows is g.indices:
        return counts
    hit = np.flatnonzero(counts)
    out = np.zeros_like(counts)
    out[g.slot_of(g.slot_sources[hit], rows[hit])] = counts[hit]
    return out


def _resolve_advice(oracle, m_advice):
    if m_advice is not None:
        return m_advice
    from .access_oracle import ensure_hash_ordered
    from .edge_counter import count_by_sampling
    est = count_by_sampling(ensure_hash_ordered(oracle), 0.5, 0.1)
    # an estimate within a factor 1/2 gives m <= 2*est
    return max(1.0, 2.0 * est) if est > 0 else 0.0


def sample_edges(oracle, eps: float, count: int, m_advice: float | None = None,
                 max_attempts: int = DEFAULT_ATTEMPT_CAP) -> np.ndarray:
    """`count` independent draws of sample_edge, as a (count, 2) array."""
    oracle.require("random_vertex", "degree", "ith_neighbor")
    m_adv = _resolve_advice(oracle, m_advice)
    if m_adv <= 0:
        raise EmptyGraphError("graph has no edges")
    params = WalkParams.from_advice(m_adv, eps)
    if oracle.n == 0:
        raise EmptyGraphError("no vertices")
    if _native(oracle):
        indptr, rows = oracle.kernel_view()
        src = oracle.graph.slot_sources
        out = np.empty(count, dtype=np.int64)
        cap = int(max_attempts) * max(1, count)
        attempts, found, rv, deg, ith = kernels.walk_samples(indptr, rows, params.theta, params.ell,
                                                             int(count), cap, draw_seed(oracle.rng), out)
        _charge_walks(oracle, rv, deg, ith)
        if found < count:
            raise AttemptCapError(f"only {found} of {count} samples after {attempts} attempts")
        return np.stack([src[out], rows[out]], axis=1)
    res = np.empty((count, 2), dtype=np.int64)
    for i in range(count):
        res[i] = _sample_one(oracle, params, max_attempts)
    return res


def _sample_one(oracle, params: WalkParams, max_attempts: int) -> DirectedEdge:
    rng = oracle.rng
    for _ in range(max_attempts):
        k = int(rng.integers(1, params.ell + 1))
        e = sampling_attempt(oracle, k, params, rng)
        if e is not None:
            return e
    raise AttemptCapError(f"no success in {max_attempts} attempts; advice may be far too large")


def sample_edge(oracle, eps: float, m_advice: float | None = None,
                max_attempts: int = DEFAULT_ATTEMPT_CAP) -> DirectedEdge:
    """A directed edge from a distribution pointwise eps-close to uniform.

    With m_advice absent, a factor-two estimate of m is obtained first by edge counting.
    """
    oracle.require("random_vertex", "degree", "ith_neighbor")
    m_adv = _resolve_advice(oracle, m_advice)
    if m_adv <= 0:
        raise EmptyGraphError("graph has no edges")
    params = WalkParams.from_advice(m_adv, eps)
    if _native(oracle):
        u, v = sample_edges(oracle, eps, 1, m_adv, max_attempts)[0]
        return DirectedEdge(int(u), int(v))
    return _sample_one(oracle, params, max_attempts)
