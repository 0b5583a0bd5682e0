"""Exact ground truth for verification. Reads the whole graph; never used by estimators."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .graph_core import Graph


# walk sampler analytics

def heavy_fraction_table(graph: Graph, theta: int, ell: int) -> np.ndarray:
    """h[i, v] for 0 <= i <= ell: the fraction-of-heavy-walks table.

    h[1, v] = d_H(v)/d(v) and h[i, v] = sum over heavy neighbours w of h[i-1, w] / d(v),
    for heavy v; rows are zero at light vertices except h[0] = 1 at heavy ones.
    """
    n = graph.n
    deg = graph.degrees
    heavy = deg >= theta
    h = np.zeros((ell + 1, n))
    h[0, heavy] = 1.0
    src = graph.slot_sources
    dst = graph.indices
    keep = heavy[src] & heavy[dst]
    s, t = src[keep], dst[keep]
    for i in range(1, ell + 1):
        acc = np.zeros(n)
        np.add.at(acc, s, h[i - 1, t])
        row = np.zeros(n)
        row[heavy] = acc[heavy] / deg[heavy]
        h[i] = row
    return h


def heavy_fraction_matrix_power(graph: Graph, theta: int, ell: int) -> np.ndarray:
    """Same table by powers of the heavy-restricted transition matrix (dense; small graphs)."""
    n = graph.n
    deg = graph.degrees
    heavy = deg >= theta
    P = np.zeros((n, n))
    for v in np.flatnonzero(heavy):
        for w in graph.neighbors(v):
            if heavy[w]:
                P[v, w] = 1.0 / deg[v]
    h = np.zeros((ell + 1, n))
    vec = heavy.astype(float)
    h[0] = vec
    M = np.eye(n)
    for i in range(1, ell + 1):
        M = M @ P
        h[i] = M @ vec
    return h


@dataclass
class AttemptDistribution:
    """Per-slot success probability of one attempt (slots in id-sorted CSR order)."""

    probs: np.ndarray
    theta: int
    ell: int

    @property
    def success(self) -> float:
        return float(self.probs.sum())

    def conditional(self) -> np.ndarray:
        s = self.success
        return self.probs / s if s > 0 else self.probs


def exact_attempt_distribution(graph: Graph, theta: int, ell: int) -> AttemptDistribution:
    """Closed form: light-source edges 1/(ell n theta); heavy (v, w): (1 - h[ell-1, v])/(ell n theta)."""
    n = graph.n
    if n == 0:
        return AttemptDistribution(np.zeros(0), theta, ell)
    h = heavy_fraction_table(graph, theta, max(ell - 1, 0))
    src = graph.slot_sources
    heavy = graph.degrees >= theta
    base = 1.0 / (ell * n * theta)
    probs = np.where(heavy[src], (1.0 - h[ell - 1, src]) * base, base)
    return AttemptDistribution(probs, theta, ell)


def walk_distribution_dp(graph: Graph, theta: int, k: int) -> np.ndarray:
    """Per-slot output probability of an attempt with fixed length k, by forward dynamic programming.

    Tracks the probability mass of the walk sitting at each vertex after each step
    without ever using the closed form.
    """
    n = graph.n
    deg = graph.degrees.astype(float)
    src = graph.slot_sources
    dst = graph.indices
    light = graph.degrees < theta
    # step 1: u0 light, j <= d(u0): each slot of a light source has mass 1/(n theta)
    slot_mass = np.where(light[src], 1.0 / (n * theta), 0.0)
    for _ in range(k - 1):
        at = np.zeros(n)
        np.add.at(at, dst, slot_mass)
        # continue only from heavy vertices, uniform neighbour
        with np.errstate(divide="ignore", invalid="ignore"):
            per_slot = np.where(~light[src], at[src] / deg[src], 0.0)
        slot_mass = per_slot
    return slot_mass


def attempt_distribution_dp(graph: Graph, theta: int, ell: int) -> np.ndarray:
    """Average of the fixed-length distributions over k uniform in [1, ell]."""
    if graph.n == 0:
        return np.zeros(0)
    total = np.zeros(len(graph.indices))
    for k in range(1, ell + 1):
        total += walk_distribution_dp(graph, theta, k)
    return total / ell


# triangle analytics

@dataclass
class TriangleStats:
    """Exact per-edge triangle data. Edges are the rows of `edges` (u < v, sorted)."""

    n: int
    edges: np.ndarray
    t: np.ndarray
    t_plus: np.ndarray
    T: int
    adjacency: list = field(repr=False, default_factory=list)
    index: dict = field(repr=False, default_factory=dict)

    def edge_id(self, u: int, v: int) -> int:
        return edge_id(self.n, u, v)

    def t_of(self, u: int, v: int) -> int:
        return int(self.t[self.index[(min(u, v), max(u, v))]])

    def t_plus_of(self, u: int, v: int) -> int:
        return int(self.t_plus[self.index[(min(u, v), max(u, v))]])

    def key(self, u: int, v: int) -> tuple[int, int]:
        return self.t_of(u, v), self.edge_id(u, v)

    def precedes(self, e1, e2) -> bool:
        return self.key(*e1) < self.key(*e2)

    def t_plus_restricted(self, u: int, v: int, S) -> int:
        """Triangles assigned to uv whose third vertex is in S minus {u, v}."""
        S = set(int(x) for x in S)
        common = self.adjacency[u] & self.adjacency[v]
        k = self.key(u, v)
        return sum(1 for w in common if w in S and k < self.key(u, w) and k < self.key(v, w))


def edge_id(n: int, u: int, v: int) -> int:
    """Canonical id of the unordered pair {u, v}."""
    return min(u, v) * n + max(u, v)


def exact_triangle_stats(graph: Graph) -> TriangleStats:
    n = graph.n
    adj = [set(graph.neighbors(v).tolist()) for v in range(n)]
    edges = graph.edge_array()
    index = {(int(u), int(v)): i for i, (u, v) in enumerate(edges.tolist())}
    t = np.array([len(adj[u] & adj[v]) for u, v in edges.tolist()], dtype=np.int64)
    t_plus = np.zeros(len(edges), dtype=np.int64)
    T = 0
    for u in range(n):
        for v in adj[u]:
            if v <= u:
                continue
            for w in adj[u] & adj[v]:
                if w <= v:
                    continue
                T += 1
                cand = [(u, v), (u, w), (v, w)]
                best = min(cand, key=lambda e: (t[index[e]], edge_id(n, *e)))
                t_plus[index[best]] += 1
    return TriangleStats(n, edges, t, t_plus, T, adj, index)


def naive_triangle_count(graph: Graph) -> int:
    """Cubic loop over vertex triples on a dense adjacency matrix."""
    n = graph.n
    A = np.zeros((n, n), dtype=bool)
    e = graph.edge_array()
    A[e[:, 0], e[:, 1]] = True
    A[e[:, 1], e[:, 0]] = True
    count = 0
    for a in range(n):
        for b in range(a + 1, n):
            if not A[a, b]:
                continue
            for c in range(b + 1, n):
                if A[a, c] and A[b, c]:
                    count += 1
    return count


@dataclass
class InequalityAudit:
    T: int
    m: int
    assigned_total: int
    weighted_sum: float
    global_bound: float
    restricted: list  # (ell, lhs, rhs)

    @property
    def ok(self) -> bool:
        return (self.assigned_total == self.T and self.weighted_sum <= self.global_bound
                and all(lhs <= rhs for _, lhs, rhs in self.restricted))


def inequality_audit(graph: Graph, rng: np.random.Generator, subsets: int = 5) -> InequalityAudit:
    """Check sum t+ = T, sum t+ t <= 46 T^(4/3), and the restricted bound on random subsets."""
    st = exact_triangle_stats(graph)
    w = st.t_plus * st.t
    bound = 46.0 * st.T ** (4.0 / 3.0)
    restricted = []
    m = graph.m
    for _ in range(subsets):
        if graph.n == 0:
            break
        size = int(rng.integers(1, graph.n + 1))
        sub = np.zeros(graph.n, dtype=bool)
        sub[rng.choice(graph.n, size=size, replace=False)] = True
        touch = sub[st.edges[:, 0]] | sub[st.edges[:, 1]] if m else np.zeros(0, bool)
        lhs = float(w[touch].sum())
        rhs = 6.0 * (2.0 + math.log(m)) * size * st.T if m else 0.0
        restricted.append((size, lhs, rhs))
    return InequalityAudit(st.T, m, int(st.t_plus.sum()), float(w.sum()), bound, restricted)


# orientation (vertex order by degree, then id)

def out_degrees(graph: Graph) -> np.ndarray:
    """d+(v): neighbours w with (d(v), v) < (d(w), w)."""
    deg = graph.degrees
    src = graph.slot_sources
    dst = graph.indices
    fwd = (deg[src] < deg[dst]) | ((deg[src] == deg[dst]) & (src < dst))
    return np.bincount(src[fwd], minlength=graph.n)


# distribution comparison

@dataclass
class DistributionReport:
    passed: bool
    max_abs_z: float
    worst_outcome: int
    ratio_min: float
    ratio_max: float
    tv: float
    trials: int
    message: str = ""


def distribution_check(counts, probs, sigma: float = 5.0, trials: int | None = None) -> DistributionReport:
    """Per-outcome binomial z-scores of counts against analytic probabilities.

    `trials` is the number of draws (defaults to the count total; pass it when
    the analytic masses sum to less than one, e.g. attempts that may fail).
    """
    c = np.asarray(counts, dtype=float)
    p = np.asarray(probs, dtype=float)
    if c.shape != p.shape:
        raise ValueError("counts and probs differ in shape")
    if p.sum() > 1 + 1e-9:
        raise ValueError("analytic masses exceed one")
    if np.any(c < 0):
        raise ValueError("negative counts")
    N = int(c.sum()) if trials is None else int(trials)
    bad = (p == 0) & (c > 0)
    if np.any(bad):
        i = int(np.flatnonzero(bad)[0])
        return DistributionReport(False, math.inf, i, math.nan, math.inf, math.nan, N,
                                  f"outcome {i} observed {int(c[i])} times with zero analytic mass")
    if N == 0:
        return DistributionReport(True, 0.0, -1, math.nan, math.nan, 0.0, 0, "no draws")
    expected = N * p
    sd = np.sqrt(N * p * (1 - p))
    with np.errstate(divide="ignore", invalid="ignore"):
        z = np.where(sd > 0, (c - expected) / sd, 0.0)
        ratio = np.where(p > 0, (c / N) / p, np.nan)
    i = int(np.argmax(np.abs(z))) if len(z) else -1
    max_z = float(np.abs(z[i])) if len(z) else 0.0
    fail_mass = max(0.0, 1.0 - p.sum())
    emp_fail = max(0.0, 1.0 - c.sum() / N)
    tv = 0.5 * (float(np.abs(c / N - p).sum()) + abs(emp_fail - fail_mass))
    passed = max_z <= sigma
    msg = "" if passed else f"outcome {i} deviates by {max_z:.2f} sigma"
    return DistributionReport(passed, max_z, i, float(np.nanmin(ratio)) if len(z) else math.nan,
                              float(np.nanmax(ratio)) if len(z) else math.nan, tv, N, msg)
