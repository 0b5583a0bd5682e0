# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot loops. Semantics match _kernels_py exactly, including RNG use."""
import numpy as np
cimport numpy as cnp
from libc.stdint cimport uint64_t, int64_t, uint8_t

cnp.import_array()

cdef uint64_t GOLDEN = 0x9E3779B97F4A7C15ULL


cdef inline uint64_t _next(uint64_t* s) noexcept nogil:
    s[0] += GOLDEN
    cdef uint64_t z = s[0]
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL
    return z ^ (z >> 31)


cdef inline int64_t _below(uint64_t* s, uint64_t n) noexcept nogil:
    cdef uint64_t threshold = (<uint64_t>0 - n) % n
    cdef uint64_t r
    while True:
        r = _next(s)
        if r >= threshold:
            return <int64_t>(r % n)


cdef inline int64_t _attempt(const int64_t[::1] indptr, const int64_t[::1] nbr,
                             int64_t theta, int64_t k, uint64_t* s,
                             int64_t* stats) noexcept nogil:
    cdef int64_t n = indptr.shape[0] - 1
    cdef int64_t u = _below(s, <uint64_t>n)
    cdef int64_t d, j, slot, i
    stats[0] += 1
    d = indptr[u + 1] - indptr[u]
    stats[1] += 1
    if d >= theta:
        return -1
    j = _below(s, <uint64_t>theta) + 1
    if d < j:
        return -1
    slot = indptr[u] + j - 1
    stats[2] += 1
    u = nbr[slot]
    for i in range(k - 1):
        d = indptr[u + 1] - indptr[u]
        stats[1] += 1
        if d < theta:
            return -1
        slot = indptr[u] + _below(s, <uint64_t>d)
        stats[2] += 1
        u = nbr[slot]
    return slot


def walk_attempts(const int64_t[::1] indptr, const int64_t[::1] nbr, int64_t theta,
                  int64_t ell, int64_t kfix, int64_t n_attempts, uint64_t seed,
                  int64_t[::1] counts):
    cdef uint64_t s = seed
    cdef int64_t stats[3]
    cdef int64_t succ = 0, a, k, slot
    stats[0] = 0
    stats[1] = 0
    stats[2] = 0
    with nogil:
        for a in range(n_attempts):
            if kfix > 0:
                k = kfix
            else:
                k = _below(&s, <uint64_t>ell) + 1
            slot = _attempt(indptr, nbr, theta, k, &s, stats)
            if slot >= 0:
                counts[slot] += 1
                succ += 1
    return succ, stats[0], stats[1], stats[2]


def walk_samples(const int64_t[::1] indptr, const int64_t[::1] nbr, int64_t theta,
                 int64_t ell, int64_t n_samples, int64_t max_attempts, uint64_t seed,
                 int64_t[::1] out):
    cdef uint64_t s = seed
    cdef int64_t stats[3]
    cdef int64_t found = 0, attempts = 0, k, slot
    stats[0] = 0
    stats[1] = 0
    stats[2] = 0
    with nogil:
        while found < n_samples and attempts < max_attempts:
            k = _below(&s, <uint64_t>ell) + 1
            slot = _attempt(indptr, nbr, theta, k, &s, stats)
            attempts += 1
            if slot >= 0:
                out[found] = slot
                found += 1
    return attempts, found, stats[0], stats[1], stats[2]


def slot_triangles(const int64_t[::1] indptr, const int64_t[::1] nbr):
    cdef int64_t n = indptr.shape[0] - 1
    out_arr = np.zeros(nbr.shape[0], dtype=np.int64)
    cdef int64_t[::1] out = out_arr
    cdef int64_t u, v, s, a, ae, b, be, c
    with nogil:
        for u in range(n):
            for s in range(indptr[u], indptr[u + 1]):
                v = nbr[s]
                if v <= u:
                    continue
                a = indptr[u]
                ae = indptr[u + 1]
                b = indptr[v]
                be = indptr[v + 1]
                c = 0
                while a < ae and b < be:
                    if nbr[a] < nbr[b]:
                        a += 1
                    elif nbr[b] < nbr[a]:
                        b += 1
                    else:
                        c += 1
                        a += 1
                        b += 1
                out[s] = c
                out[_find(nbr, indptr[v], indptr[v + 1], u)] = c
    return out_arr


cdef inline int64_t _find(const int64_t[::1] nbr, int64_t lo, int64_t hi, int64_t x) noexcept nogil:
    cdef int64_t mid
    while lo < hi:
        mid = (lo + hi) >> 1
        if nbr[mid] < x:
            lo = mid + 1
        else:
            hi = mid
    return lo


cdef inline bint _precedes(int64_t t1, int64_t id1, int64_t t2, int64_t id2) noexcept nogil:
    return t1 < t2 or (t1 == t2 and id1 < id2)


def tri_rounds(const int64_t[::1] indptr, const int64_t[::1] nbr, const int64_t[::1] src,
               const int64_t[::1] tslot, const int64_t[::1] slots, const uint8_t[::1] heavy,
               uint8_t[::1] fetched, uint64_t seed):
    cdef uint64_t st = seed
    cdef int64_t n = indptr.shape[0] - 1
    cdef bint use_heavy = heavy.shape[0] > 0
    cdef int64_t acc = 0, draws = 0
    cdef int64_t r, s, u, v, w, t, j, a, ae, b, be, tuw, tvw, iuv, iuw, ivw
    with nogil:
        for r in range(slots.shape[0]):
            s = slots[r]
            u = src[s]
            v = nbr[s]
            fetched[u] = 1
            fetched[v] = 1
            if use_heavy and not (heavy[u] or heavy[v]):
                continue
            t = tslot[s]
            if t == 0:
                continue
            j = _below(&st, <uint64_t>t)
            a = indptr[u]
            ae = indptr[u + 1]
            b = indptr[v]
            be = indptr[v + 1]
            w = -1
            while a < ae and b < be:
                if nbr[a] < nbr[b]:
                    a += 1
                elif nbr[b] < nbr[a]:
                    b += 1
                else:
                    if j == 0:
                        w = nbr[a]
                        break
                    j -= 1
                    a += 1
                    b += 1
            draws += 1
            fetched[w] = 1
            tuw = tslot[_find(nbr, indptr[u], indptr[u + 1], w)]
            tvw = tslot[_find(nbr, indptr[v], indptr[v + 1], w)]
            iuv = (u if u < v else v) * n + (v if u < v else u)
            iuw = (u if u < w else w) * n + (w if u < w else u)
            ivw = (v if v < w else w) * n + (w if v < w else v)
            if _precedes(t, iuv, tuw, iuw) and _precedes(t, iuv, tvw, ivw):
                acc += t
    return acc, draws
