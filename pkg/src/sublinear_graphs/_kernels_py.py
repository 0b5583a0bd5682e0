"""Pure-Python twins of the compiled kernels in _kernels.pyx.

Both implementations consume the same splitmix64 stream in the same order,
so for a given seed they return identical results.
"""
import numpy as np

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15


class _Stream:
    __slots__ = ("s",)

    def __init__(self, seed):
        self.s = int(seed) & MASK64

    def next(self):
        self.s = (self.s + GOLDEN) & MASK64
        z = self.s
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
        return z ^ (z >> 31)

    def below(self, n):
        # uniform on [0, n) by rejection of the biased low range
        threshold = ((1 << 64) - n) % n
        while True:
            r = self.next()
            if r >= threshold:
                return r % n


def _attempt(indptr, nbr, theta, k, rs, stats):
    """One walk attempt. Returns the slot of the output edge or -1."""
    n = len(indptr) - 1
    u = rs.below(n)
    stats[0] += 1
    d = indptr[u + 1] - indptr[u]
    stats[1] += 1
    if d >= theta:
        return -1
    j = rs.below(theta) + 1
    if d < j:
        return -1
    slot = indptr[u] + j - 1
    stats[2] += 1
    u = nbr[slot]
    for _ in range(k - 1):
        d = indptr[u + 1] - indptr[u]
        stats[1] += 1
        if d < theta:
            return -1
        slot = indptr[u] + rs.below(d)
        stats[2] += 1
        u = nbr[slot]
    return slot


def walk_attempts(indptr, nbr, theta, ell, kfix, n_attempts, seed, counts):
    """Run n_attempts walk attempts, adding successes to counts[slot].

    kfix > 0 fixes the walk length; kfix == 0 draws it uniformly from [1, ell]
    before each attempt. Returns (successes, random_vertex, degree, ith_neighbor).
    """
    rs = _Stream(seed)
    stats = [0, 0, 0]
    succ = 0
    indptr = indptr.tolist()
    nbr_l = nbr.tolist()
    for _ in range(n_attempts):
        k = kfix if kfix > 0 else rs.below(ell) + 1
        slot = _attempt(indptr, nbr_l, theta, k, rs, stats)
        if slot >= 0:
            counts[slot] += 1
            succ += 1
    return succ, stats[0], stats[1], stats[2]


def walk_samples(indptr, nbr, theta, ell, n_samples, max_attempts, seed, out):
    """Repeat attempts (random length) until n_samples successes or max_attempts.

    Writes success slots to out[:n_samples]. Returns
    (attempts, found, random_vertex, degree, ith_neighbor).
    """
    rs = _Stream(seed)
    stats = [0, 0, 0]
    found = 0
    attempts = 0
    indptr = indptr.tolist()
    nbr_l = nbr.tolist()
    while found < n_samples and attempts < max_attempts:
        k = rs.below(ell) + 1
        slot = _attempt(indptr, nbr_l, theta, k, rs, stats)
        attempts += 1
        if slot >= 0:
            out[found] = slot
            found += 1
    return attempts, found, stats[0], stats[1], stats[2]


def slot_triangles(indptr, nbr):
    """t(uv) = |N(u) & N(v)| for every directed slot (rows must be id-sorted)."""
    n = len(indptr) - 1
    out = np.zeros(len(nbr), dtype=np.int64)
    rows = [set(nbr[indptr[u]:indptr[u + 1]].tolist()) for u in range(n)]
    for u in range(n):
        ru = rows[u]
        for s in range(indptr[u], indptr[u + 1]):
            v = int(nbr[s])
            if v > u:
                c = len(ru & rows[v]) if len(ru) <= len(rows[v]) else len(rows[v] & ru)
                out[s] = c
                # mirror slot
                lo, hi = indptr[v], indptr[v + 1]
                out[lo + int(np.searchsorted(nbr[lo:hi], u))] = c
    return out


def _find(nbr, lo, hi, x):
    while lo < hi:
        mid = (lo + hi) >> 1
        if nbr[mid] < x:
            lo = mid + 1
        else:
            hi = mid
    return lo


def tri_rounds(indptr, nbr, src, tslot, slots, heavy, fetched, seed):
    """Triangle-assignment rounds over sampled directed slots.

    For slot uv: mark u, v fetched; if a heavy mask is given (non-empty) skip
    unless u or v is heavy; pick w uniform in N(u) & N(v), mark it fetched,
    and add t(uv) when uv precedes both uw and vw in the (t, id) edge order.
    Returns (accumulated sum, number of w draws).
    """
    rs = _Stream(seed)
    n = len(indptr) - 1
    use_heavy = len(heavy) > 0
    acc = 0
    draws = 0
    for s in slots:
        s = int(s)
        u = int(src[s])
        v = int(nbr[s])
        fetched[u] = 1
        fetched[v] = 1
        if use_heavy and not (heavy[u] or heavy[v]):
            continue
        t = int(tslot[s])
        if t == 0:
            continue
        j = rs.below(t)
        # j-th common neighbor by merging the two sorted rows
        a, ae = indptr[u], indptr[u + 1]
        b, be = indptr[v], indptr[v + 1]
        w = -1
        while a < ae and b < be:
            x = nbr[a]
            y = nbr[b]
            if x < y:
                a += 1
            elif y < x:
                b += 1
            else:
                if j == 0:
                    w = int(x)
                    break
                j -= 1
                a += 1
                b += 1
        draws += 1
        fetched[w] = 1
        tuw = int(tslot[_find(nbr, indptr[u], indptr[u + 1], w)])
        tvw = int(tslot[_find(nbr, indptr[v], indptr[v + 1], w)])
        iuv = min(u, v) * n + max(u, v)
        iuw = min(u, w) * n + max(u, w)
        ivw = min(v, w) * n + max(v, w)
        if (t, iuv) < (tuw, iuw) and (t, iuv) < (tvw, ivw):
            acc += t
    return acc, draws
