"""(1 +- eps)-approximate edge counting, and removal of the edge-count advice."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .access_oracle import ensure_hash_ordered
from .biased_sampler import draw_sample, inclusion_probability, preprocess
from .errors import DomainError, ParameterError
from .multi_edge_sampler import bernoulli_samples

# classify_out_degree: samples per unit of d*ln(n)/theta
FIXED_BUDGET_C = 18
ADAPTIVE_C = 24

# overshoot constants for advice removal
DIRECT_OVERSHOOT = 8
PAIRS_OVERSHOOT = 7

DIRECT_SAMPLER_DELTA = 1 / 12

# expected phase-2 hits handled per block
PHASE2_BLOCK_HITS = 10**6


@dataclass(frozen=True)
class AdviceWindow:
    advice: float

    @property
    def m_up(self) -> float:
        return self.advice / 2

    @property
    def m_down(self) -> float:
        return 2 * self.advice


def _check_eps(eps: float) -> None:
    if not 0 < eps < 1:
        raise DomainError(f"eps must lie in (0, 1), got {eps}")


# Bernoulli-sampling estimator

def count_by_sampling(oracle, eps: float, delta: float, m_advice: float | None = None) -> float:
    """Double p from 1/n^2 until a Bernoulli edge sample is large enough; scale its size back.

    Samples are directed edges, so the returned estimate is |S| / (2p).
    """
    if not 0 < eps < 1:
        raise DomainError(f"eps must lie in (0, 1), got {eps}")
    n = oracle.n
    if n < 2:
        return 0.0
    ho = ensure_hash_ordered(oracle)
    lg = math.log2(n)
    threshold = 6 * (math.log(1 / delta) + math.log(8 * lg)) / eps**2
    per_call = delta / (4 * lg)
    p = 1.0 / n**2
    while True:
        pc = min(1.0, p)
        size = len(bernoulli_samples(ho, pc, 1, per_call, m_advice)[0])
        if size >= threshold:
            return size / (2 * pc)
        if pc >= 1:
            return size / 2
        p *= 2


# Horvitz-Thompson estimator over biased vertex samples

@dataclass
class DirectRun:
    estimate: float
    theta: float
    theta_clamped: bool
    light_part: float
    heavy_part: float


def direct_parameters(n: int, eps: float, m_advice: float) -> tuple[float, bool, int, float]:
    """(theta, clamped?, light sample size k, p_N)."""
    ln_n = math.log(n)
    lt = ln_n + math.log(12)
    theta = min(eps * math.sqrt(m_advice * lt / 32), eps**2 * n / (64 * ln_n))
    clamped = theta < 1
    theta = max(1.0, theta)
    k = math.ceil(2 * n * lt / theta)
    p_n = n / (max(m_advice, 1e-12) * ln_n)
    return theta, clamped, k, p_n


def count_direct_run(oracle, eps: float, m_advice: float) -> DirectRun:
    _check_eps(eps)
    n = oracle.n
    if n < 2:
        raise ParameterError("count_direct needs n >= 2")
    ho = ensure_hash_ordered(oracle)
    theta, clamped, k, p_n = direct_parameters(n, eps, m_advice)
    sl = ho.random_vertices(k)
    d = ho.degrees(sl)
    light_part = n / (2 * k) * float(d[d < theta].sum())
    state = preprocess(ho, theta, DIRECT_SAMPLER_DELTA, m_advice)
    sh = draw_sample(state, p_n)
    heavy_part = 0.0
    if sh.size:
        dh = state.known_degree(sh)
        heavy_part = 0.5 * float(np.sum(dh / inclusion_probability(dh, theta, p_n)))
    return DirectRun(light_part + heavy_part, theta, clamped, light_part, heavy_part)


def count_direct(oracle, eps: float, m_advice: float) -> float:
    """Light vertices by uniform sampling plus heavy ones by biased sampling, combined Horvitz-Thompson style.

    When the threshold formula drops below one it is raised to one (the
    uniform half then only sees isolated vertices and the biased half covers
    the rest), instead of refusing to run.
    """
    return count_direct_run(oracle, eps, m_advice).estimate


# pair-query estimator

def precedes(deg_u: int, u: int, deg_v: int, v: int) -> bool:
    """Vertex order: by degree, then id."""
    return deg_u < deg_v or (deg_u == deg_v and u < v)


class OutDegreeClassifier:
    """Memoized light/heavy labels by out-degree under the (degree, id) orientation.

    Heavy is guaranteed (w.p. >= 1 - 1/n^3) when d+(v) >= 2 theta and light when
    d+(v) <= theta/2; in between either label may come out, but once given it sticks.
    """

    def __init__(self, oracle, theta: float, rng=None):
        self.oracle = oracle
        self.theta = theta
        self.rng = oracle.rng if rng is None else rng
        self.ln_n = math.log(max(oracle.n, 2))
        self.labels: dict[int, bool] = {}

    def _forward_fraction(self, v: int, d: int, idx: np.ndarray) -> int:
        o = self.oracle
        ws = o.ith_neighbors(np.full(len(idx), v), idx)
        dw = o.degrees(ws)
        return int(np.sum((d < dw) | ((d == dw) & (v < ws))))

    def _exact(self, v: int, d: int) -> bool:
        return self._forward_fraction(v, d, np.arange(1, d + 1)) >= self.theta

    def classify(self, v: int, d: int | None = None, adaptive: bool = False) -> bool:
        """True for heavy. `d` is v's degree if already known to the caller."""
        if v in self.labels:
            return self.labels[v]
        if d is None:
            d = int(self.oracle.degrees(np.array([v]))[0])
        theta = self.theta
        if d < theta / 2:
            label = False
        else:
            label = self._adaptive(v, d) if adaptive else self._fixed(v, d)
        self.labels[v] = label
        return label

    def _fixed(self, v: int, d: int) -> bool:
        s = math.ceil(FIXED_BUDGET_C * d * self.ln_n / self.theta)
        if s >= d:
            return self._exact(v, d)
        x = self._forward_fraction(v, d, self.rng.integers(1, d + 1, size=s))
        return d * x / s >= self.theta

    def _adaptive(self, v: int, d: int) -> bool:
        s_max = math.ceil(ADAPTIVE_C * d * self.ln_n / self.theta)
        if s_max >= d:
            return self._exact(v, d)
        floor_count = ADAPTIVE_C * self.ln_n
        s = 0
        x = 0
        step = math.ceil(floor_count)
        while True:
            step = min(step, s_max - s)
            x += self._forward_fraction(v, d, self.rng.integers(1, d + 1, size=step))
            s += step
            if x >= floor_count and d * x / s >= self.theta:
                return True
            if s >= s_max:
                return d * x / s >= self.theta
            step = s


def classify_out_degree(oracle, v: int, theta: float, memo: OutDegreeClassifier | None = None) -> str:
    memo = memo if memo is not None else OutDegreeClassifier(oracle, theta)
    return "heavy" if memo.classify(v) else "light"


@dataclass
class PairRun:
    estimate: float | None
    light_part: float
    heavy_part: float
    failed: bool
    theta: float


def count_pair_queries_run(oracle, eps: float, m_advice: float, rng=None) -> PairRun:
    _check_eps(eps)
    oracle.require("random_vertex", "degree", "ith_neighbor", "pair")
    rng = oracle.rng if rng is None else rng
    n = oracle.n
    if n < 2:
        raise ParameterError("count_pair_queries needs n >= 2")
    win = AdviceWindow(max(m_advice, 1e-12))
    theta = eps * math.sqrt(win.m_down)
    tau = math.sqrt(win.m_down / (8 * eps))
    ln_n = math.log(n)
    cls = OutDegreeClassifier(oracle, theta, rng)

    # phase 1: light out-degree mass
    k = max(1, math.ceil(432 * theta * n / (eps**2 * win.m_up)))
    v = oracle.random_vertices(k)
    dv = oracle.degrees(v)
    has = dv > 0
    vv, dd = v[has], dv[has]
    j = rng.integers(1, dd + 1)
    w = oracle.ith_neighbors(vv, j)
    dw = oracle.degrees(w)
    fwd = (dd < dw) | ((dd == dw) & (vv < w))
    a1 = 0.0
    for x, dx in zip(vv[fwd].tolist(), dd[fwd].tolist()):
        if not cls.classify(x, dx, adaptive=True):
            a1 += dx
    light = n * a1 / k

    # phase 2: heavy vertices reached from high-degree samples
    s_size = math.ceil(48 * n * ln_n / theta)
    S = oracle.random_vertices(s_size)
    dS = oracle.degrees(S)
    big = dS >= theta
    Sp, dSp = S[big], dS[big]
    if len(Sp) > 576 * win.m_down * ln_n / theta**2 or dSp.sum() > 1152 * win.m_down * ln_n / theta:
        return PairRun(None, light, 0.0, True, theta)
    k2 = math.ceil(468 / eps**2)
    p = min(1.0, theta / win.m_up)
    total_heavy = 0.0
    D = int(dSp.sum())
    if D > 0:
        row_start = np.concatenate([[0], np.cumsum(dSp)[:-1]])
        sp_distinct, sp_mult = np.unique(Sp, return_counts=True)
        r_of: dict[int, int] = {}
        # rounds are processed in blocks to bound memory
        block = max(1, int(PHASE2_BLOCK_HITS / max(D * p, 1e-12)))
        for r0 in range(0, k2, block):
            nb = min(block, k2 - r0)
            total_heavy += _phase2_block(oracle, cls, rng, Sp, dSp, row_start, sp_distinct, sp_mult,
                                         r_of, nb * D, D, p, tau)
    heavy = total_heavy / k2
    return PairRun(light + heavy, light, heavy, False, theta)


def _phase2_block(oracle, cls, rng, Sp, dSp, row_start, sp_distinct, sp_mult, r_of, N, D, p, tau) -> float:
    """Phase-2 rounds covering N = rounds * D Bernoulli trials; returns the summed weights."""
    n = oracle.n
    hits = _bernoulli_positions(N, p, rng)
    if hits.size == 0:
        return 0.0
    rnd = hits // D
    off = hits % D
    copy = np.searchsorted(row_start, off, side="right") - 1
    targets = oracle.ith_neighbors(Sp[copy], off - row_start[copy] + 1)
    # the reached set T' of each round is a set
    pairs = np.unique(rnd * n + targets)
    tv = pairs % n
    dt = oracle.degrees(tv)
    small = dt <= tau
    tv, dt = tv[small], dt[small]
    ux, first = np.unique(tv, return_index=True)
    heavy_x = np.array([cls.classify(x, d) for x, d in zip(ux.tolist(), dt[first].tolist())], dtype=bool)
    keep = heavy_x[np.searchsorted(ux, tv)]
    tv, dt = tv[keep], dt[keep]
    if tv.size == 0:
        return 0.0
    for x in np.unique(tv).tolist():
        if x not in r_of:
            adj = oracle.pairs(np.full(len(sp_distinct), x), sp_distinct)
            r_of[x] = int(sp_mult[adj].sum())
    r = np.array([r_of[x] for x in tv.tolist()], dtype=np.float64)
    wx = oracle.ith_neighbors(tv, rng.integers(1, dt + 1))
    dw = oracle.degrees(wx)
    fwd = (dt < dw) | ((dt == dw) & (tv < wx))
    if p >= 1:
        weight = dt.astype(np.float64)
    else:
        weight = dt / -np.expm1(r * math.log1p(-p))
    return float(weight[fwd].sum())


def _bernoulli_positions(N: int, p: float, rng) -> np.ndarray:
    """Sorted positions of successes among N independent Bernoulli(p) trials."""
    if p >= 1:
        return np.arange(N, dtype=np.int64)
    K = int(rng.binomial(N, p))
    if K == 0:
        return np.zeros(0, dtype=np.int64)
    pos = np.unique(rng.integers(0, N, size=K))
    while len(pos) < K:
        more = rng.integers(0, N, size=K - len(pos))
        pos = np.unique(np.concatenate([pos, more]))
    return pos


def count_pair_queries(oracle, eps: float, m_advice: float) -> float | None:
    """Out-degree based estimator with pair queries. Returns None on the failure outcome."""
    return count_pair_queries_run(oracle, eps, m_advice).estimate


# advice removal

@dataclass
class AdviceResult:
    estimate: float
    advice: float
    confident: bool
    rounds: int
    runs: int


def amplification_reps(n: int) -> int:
    return max(9, math.ceil(24 * math.log(math.log(max(n, 16)))))


def remove_advice(estimator: Callable[[float], float | None], phi_max: float, c: float, n: int,
                  reps: int | None = None, stop_ratio: float = 2.0) -> AdviceResult:
    """Search the advice downward from phi_max, halving each round.

    Each round runs the estimator `reps` times (failures count as +inf) and
    stops at the first round whose median reaches advice / stop_ratio,
    returning that median. With the default ratio 2 the stopping advice lands
    in (phi, 2 phi], inside the estimator's accuracy window [phi, c phi] for
    any c >= 2; rounds with advice above c phi stop only on an overshoot. If
    the advice drops below one first, the last median is returned flagged as
    not confident.
    """
    if c < 2:
        raise ParameterError("overshoot constant must be at least 2")
    if not 1 < stop_ratio <= c:
        raise ParameterError("stop_ratio must lie in (1, c]")
    reps = amplification_reps(n) if reps is None else reps
    need = reps // 2 + 1
    phi = float(phi_max)
    rounds = runs = 0
    med = 0.0
    while phi >= 1:
        rounds += 1
        vals = []
        below = 0
        for _ in range(reps):
            x = estimator(phi)
            runs += 1
            x = math.inf if x is None else float(x)
            vals.append(x)
            if x < phi / stop_ratio:
                below += 1
                if below >= need:
                    break
        med = float(np.median(vals))
        if below < need and med >= phi / stop_ratio:
            return AdviceResult(med, phi, True, rounds, runs)
        phi /= 2
    return AdviceResult(med if math.isfinite(med) else 0.0, phi, False, rounds, runs)


def count_edges(oracle, eps: float, algo: str = "direct") -> AdviceResult:
    """Advice-free edge count by wrapping count_direct ('direct') or count_pair_queries ('pairs')."""
    n = oracle.n
    if n < 2:
        return AdviceResult(0.0, 0.0, True, 0, 0)
    phi_max = max(1.0, n * (n - 1) / 2)
    if algo == "direct":
        return remove_advice(lambda a: count_direct(oracle, eps, a), phi_max, DIRECT_OVERSHOOT, n)
    if algo == "pairs":
        return remove_advice(lambda a: count_pair_queries(oracle, eps, a), phi_max, PAIRS_OVERSHOOT, n)
    raise ParameterError(f"unknown algorithm {algo!r}")
