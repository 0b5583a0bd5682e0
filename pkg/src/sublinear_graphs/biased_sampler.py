"""Degree-biased vertex sampling over hash-ordered neighbor access.

A preprocessing step draws, for each level k, a multiset S_k of uniform
vertices and opens a cursor on the hash-ordered neighbor list of each member.
Each draw advances the cursors past every neighbor whose (virtual) hash lies
below the current threshold; vertices so reached whose degree falls in the
level's band are returned, then given fresh virtual hashes above the
threshold so later draws are independent.

The per-level priority queue is kept implicitly: the cursors plus the table
of virtual hashes hold exactly the queue's items, and a draw pops them all
at once with vectorized comparisons. Hashes are handled in exponential-clock
form E = -ln(1 - h): the threshold after the l-th draw is l*lam with
lam = -ln(1 - p_N 2^k), and resampling above it is E = l*lam + Exp(1).
This keeps full precision where h itself would crowd against 1.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, ParameterError

MAX_RESAMPLES = 20


def level_of(d, theta):
    """floor(lg(d / theta)) for d >= theta, exact at powers of two; vectorized."""
    d = np.asarray(d, dtype=np.float64)
    j = np.floor(np.log2(d / theta))
    j = np.where(np.exp2(j + 1) * theta <= d, j + 1, j)
    j = np.where(np.exp2(j) * theta > d, j - 1, j)
    return j.astype(np.int64)


def inclusion_probability(d, theta, p_n):
    """min(1, p_N 2^floor(lg(d/theta))), the per-draw inclusion rate of a vertex of degree d."""
    d_arr = np.asarray(d, dtype=np.float64)
    if np.any(d_arr < theta):
        raise DomainError("inclusion probability is defined only for d >= theta")
    out = np.minimum(1.0, p_n * np.exp2(level_of(d_arr, theta)))
    return float(out) if np.ndim(out) == 0 else out


def concat_ranges(starts: np.ndarray, lengths: np.ndarray) -> np.ndarray:
    """Concatenation of arange(s, s + l) over pairs; all in numpy."""
    lengths = np.asarray(lengths, dtype=np.int64)
    total = int(lengths.sum())
    if total == 0:
        return np.zeros(0, dtype=np.int64)
    nz = lengths > 0
    starts = np.asarray(starts, dtype=np.int64)[nz]
    lengths = lengths[nz]
    step = np.ones(total, dtype=np.int64)
    heads = np.concatenate([[0], np.cumsum(lengths)[:-1]])
    step[heads[0]] = starts[0]
    if len(heads) > 1:
        step[heads[1:]] = starts[1:] - (starts[:-1] + lengths[:-1] - 1)
    return np.cumsum(step)


def _to_clock(h: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore"):
        return -np.log1p(-h)


@dataclass
class _Level:
    k: int
    lo: float
    hi: float
    sample: np.ndarray        # multiset S_k
    members: np.ndarray       # distinct members with at least one neighbor
    deg: np.ndarray           # degrees of members
    row_off: np.ndarray       # offsets of member rows in slot_v / slot_e
    slot_v: np.ndarray        # hash-ordered neighbors of members, concatenated
    slot_e: np.ndarray        # clock value of each such neighbor's hash
    passed: np.ndarray        # neighbors already popped, per member
    pos: np.ndarray           # neighbors already queried, per member
    processed: np.ndarray     # bool per vertex
    virt_v: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int64))
    virt_e: np.ndarray = field(default_factory=lambda: np.zeros(0))
    next_clock: float | None = None  # smallest pending priority; None when stale

    def pending_min(self) -> float:
        if self.next_clock is None:
            live = self.passed < self.deg
            heads = self.slot_e[self.row_off[:-1][live] + self.passed[live]]
            cands = [heads.min()] if heads.size else []
            if self.virt_e.size:
                cands.append(self.virt_e.min())
            self.next_clock = float(min(cands)) if cands else math.inf
        return self.next_clock


class BiasedSamplerState:
    """Samples, cursors and virtual hashes for every level, plus the draw counter."""

    def __init__(self, oracle, theta: float, delta: float):
        self.oracle = oracle
        self.theta = theta
        self.delta = delta
        self.calls = 0
        self.p_n: float | None = None
        self.levels: list[_Level] = []
        self.resamples: list[int] = []
        self.resample_capped = False
        self._deg = np.full(oracle.n, -1, dtype=np.int64)

    def degrees(self, vs: np.ndarray) -> np.ndarray:
        """Degrees with memoization: each distinct vertex costs one degree query."""
        vs = np.asarray(vs, dtype=np.int64)
        unknown = np.unique(vs[self._deg[vs] < 0])
        if unknown.size:
            self._deg[unknown] = self.oracle.degrees(unknown)
        return self._deg[vs]

    def known_degree(self, vs) -> np.ndarray:
        return self._deg[np.asarray(vs, dtype=np.int64)]

    def queue_items(self, k: int) -> list[tuple[float, int, object]]:
        """Materialize the implicit queue of level k as (clock priority, vertex, index or 'virtual')."""
        L = self.levels[k]
        items = []
        for j, u in enumerate(L.members.tolist()):
            if L.passed[j] < L.deg[j]:
                s = L.row_off[j] + L.passed[j]
                items.append((float(L.slot_e[s]), int(L.slot_v[s]), (u, int(L.passed[j]) + 1)))
        for v, e in zip(L.virt_v.tolist(), L.virt_e.tolist()):
            items.append((e, v, "virtual"))
        items.sort(key=lambda it: (it[0], it[1]))
        return items

    def virtual_clock(self, k: int, v: int) -> float:
        L = self.levels[k]
        hit = np.flatnonzero(L.virt_v == v)
        if hit.size:
            return float(L.virt_e[hit[0]])
        return float(_to_clock(np.array([self.oracle.hashes.values[v]]))[0])

    def virtual_hash(self, k: int, v: int) -> float:
        """Current virtual hash of v at level k, in (0, 1]."""
        return float(-np.expm1(-self.virtual_clock(k, v)))


def preprocess(oracle, theta: float, delta: float, m_advice: float | None = None,
               max_resamples: int = MAX_RESAMPLES) -> BiasedSamplerState:
    """Draw the per-level samples and open one cursor per member.

    Level k gets ceil(n ln(2n/delta) / (2^k theta)) uniform vertices. With an
    edge-count bound m_advice the sample is redrawn while its degree sum reaches
    4 m ln(2n/delta) / (2^k theta), at most max_resamples times.
    """
    if theta < 1:
        raise ParameterError(f"theta must be >= 1, got {theta}")
    if not 0 < delta < 1:
        raise ParameterError(f"delta must lie in (0, 1), got {delta}")
    n = oracle.n
    state = BiasedSamplerState(oracle, theta, delta)
    if n == 0:
        return state
    indptr, rows, vals = oracle.hash_view()
    log_term = math.log(2 * n / delta)
    for k in range(int(math.floor(math.log2(n))) + 1):
        scale = log_term / (2**k * theta)
        size = math.ceil(n * scale)
        tries = 0
        while True:
            S = oracle.random_vertices(size)
            degS = state.degrees(S)
            if m_advice is None or degS.sum() < 4 * m_advice * scale:
                break
            tries += 1
            if tries > max_resamples:
                state.resample_capped = True
                break
        state.resamples.append(tries)
        uniq = np.unique(S)
        du = state.known_degree(uniq)
        members = uniq[du > 0]
        deg = du[du > 0]
        row_off = np.concatenate([[0], np.cumsum(deg)]).astype(np.int64)
        idx = concat_ranges(indptr[members], deg)
        slot_v = rows[idx]
        slot_e = _to_clock(vals[idx])
        # each cursor starts by querying the first neighbor and its hash
        oracle.charge_scan(members, np.ones(len(members), dtype=np.int64))
        state.levels.append(_Level(
            k=k, lo=2**k * theta, hi=2 ** (k + 1) * theta, sample=S, members=members, deg=deg,
            row_off=row_off, slot_v=slot_v, slot_e=slot_e,
            passed=np.zeros(len(members), dtype=np.int64), pos=np.ones(len(members), dtype=np.int64),
            processed=np.zeros(n, dtype=bool)))
    return state


def _draw_level(state: BiasedSamplerState, L: _Level, ell: int, rng) -> np.ndarray:
    q = state.p_n * 2**L.k
    if q >= 1:
        lam = None
        tau = math.inf
    else:
        lam = -math.log1p(-q)
        tau = ell * lam
    if L.pending_min() > tau:
        # nothing in the queue is due; the cursors stay where they are
        return np.zeros(0, dtype=np.int64)
    L.next_clock = None
    if len(L.members):
        below = L.slot_e <= tau
        cs = np.concatenate([[0], np.cumsum(below)])
        c = cs[L.row_off[1:]] - cs[L.row_off[:-1]]
        fresh = concat_ranges(L.row_off[:-1] + L.passed, c - L.passed)
        crossed = L.slot_v[fresh]
        newpos = np.minimum(c + 1, L.deg)
        state.oracle.charge_scan(L.members, newpos - L.pos)
        L.pos = newpos
        L.passed = c
        crossed = np.unique(crossed)
        crossed = crossed[~L.processed[crossed]]
    else:
        crossed = np.zeros(0, dtype=np.int64)
    d = state.degrees(crossed)
    eligible = crossed[(d >= L.lo) & (d < L.hi)]
    L.processed[crossed] = True
    popped_mask = L.virt_e <= tau
    out = np.sort(np.concatenate([eligible, L.virt_v[popped_mask]]))
    if lam is None:
        fresh_e = np.full(len(out), math.inf)
    else:
        fresh_e = tau + rng.standard_exponential(len(out))
    L.virt_v = np.concatenate([L.virt_v[~popped_mask], out])
    L.virt_e = np.concatenate([L.virt_e[~popped_mask], fresh_e])
    return out


def draw_sample(state: BiasedSamplerState, p_n: float, rng=None) -> np.ndarray:
    """One draw: sorted array of sampled vertices (all of degree >= theta).

    Under the success event each vertex of degree d >= theta appears with
    probability inclusion_probability(d, theta, p_n), independently of other
    vertices and of other draws. The rate p_n is fixed for the state's lifetime.
    """
    if not p_n > 0:
        raise DomainError(f"p_N must be positive, got {p_n}")
    if state.p_n is None:
        state.p_n = float(p_n)
    elif state.p_n != p_n:
        raise ValueError("draw_sample: p_N must stay fixed across draws of one state")
    rng = state.oracle.rng if rng is None else rng
    state.calls += 1
    parts = [_draw_level(state, L, state.calls, rng) for L in state.levels]
    if not parts:
        return np.zeros(0, dtype=np.int64)
    return np.sort(np.concatenate(parts))


def verify_success_event(state: BiasedSamplerState, graph) -> bool:
    """Brute-force debug hook: every vertex of degree >= theta has a neighbor in its level's sample."""
    deg = graph.degrees
    heavy = np.flatnonzero(deg >= state.theta)
    if heavy.size == 0:
        return True
    lv = level_of(deg[heavy], state.theta)
    for v, k in zip(heavy.tolist(), lv.tolist()):
        members = state.levels[k].sample
        if not np.isin(graph.neighbors(v), members).any():
            return False
    return True
