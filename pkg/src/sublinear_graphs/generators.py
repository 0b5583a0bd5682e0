"""Instance generators, including the hard-instance families."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ParameterError
from .graph_core import Graph
from .rng import make_rng


@dataclass
class Instance:
    """A generated graph together with the realized family parameters."""

    graph: Graph
    family: str
    params: dict = field(default_factory=dict)
    flags: list = field(default_factory=list)


def complete(n: int) -> Graph:
    iu = np.triu_indices(n, 1)
    return Graph.from_edges(n, np.stack(iu, axis=1))


def star(leaves: int) -> Graph:
    return Graph.from_edges(leaves + 1, [(0, i) for i in range(1, leaves + 1)])


def cycle(n: int) -> Graph:
    if n < 3:
        raise ParameterError("a cycle needs n >= 3")
    return Graph.from_edges(n, [(i, (i + 1) % n) for i in range(n)])


def path(n: int) -> Graph:
    return Graph.from_edges(n, [(i, i + 1) for i in range(n - 1)])


def disjoint_union(*graphs: Graph) -> Graph:
    parts = []
    off = 0
    for g in graphs:
        parts.append(g.edge_array() + off)
        off += g.n
    edges = np.concatenate(parts) if parts else np.zeros((0, 2), dtype=np.int64)
    return Graph.from_edges(off, edges)


def clique_with_padding(clique: int, n: int, m: int) -> Graph:
    """K_clique plus triangle-free bipartite padding on the other vertices, m edges in total.

    Padding edge t joins a_(t mod h) to b_((t mod h + t div h) mod h) across the
    two halves of the remaining vertices, so degrees stay within 2 while t < 2h.
    """
    rest = n - clique
    h = rest // 2
    need = m - clique * (clique - 1) // 2
    if rest < 0 or need < 0 or need > h * h:
        raise ParameterError("padding does not fit")
    edges = [(i, j) for i in range(clique) for j in range(i + 1, clique)]
    for t in range(need):
        i, j = t % h, t // h
        edges.append((clique + i, clique + h + (i + j) % h))
    return Graph.from_edges(n, edges)


def gen_er(n: int, m: int, seed=None) -> Graph:
    """Uniform graph with exactly m edges: m distinct unordered pairs drawn uniformly."""
    total = n * (n - 1) // 2
    if m < 0 or m > total:
        raise ParameterError(f"m={m} impossible with n={n}")
    rng = make_rng(seed)
    if m > total // 2:
        # draw the complement instead
        comp = _distinct_pairs(n, total - m, rng)
        iu = np.stack(np.triu_indices(n, 1), axis=1)
        keep = np.ones(total, dtype=bool)
        keep[_pair_rank(n, comp)] = False
        return Graph.from_edges(n, iu[keep])
    return Graph.from_edges(n, _distinct_pairs(n, m, rng))


def _pair_rank(n: int, pairs: np.ndarray) -> np.ndarray:
    # position of (i, j), i < j, in row-major upper-triangle order
    i = pairs[:, 0]
    j = pairs[:, 1]
    return i * n - i * (i + 1) // 2 + (j - i - 1)


def _distinct_pairs(n: int, m: int, rng) -> np.ndarray:
    codes = np.zeros(0, dtype=np.int64)
    while len(codes) < m:
        k = m - len(codes)
        u = rng.integers(0, n, size=2 * k)
        v = rng.integers(0, n, size=2 * k)
        ok = u != v
        c = np.minimum(u, v)[ok] * n + np.maximum(u, v)[ok]
        merged = np.concatenate([codes, c])
        _, first = np.unique(merged, return_index=True)
        codes = merged[np.sort(first)][:m]
    return np.stack([codes // n, codes % n], axis=1)


def gen_cliques_plus_independent(n: int, s: int, m: int) -> Instance:
    """s disjoint cliques on ceil(sqrt(2m/s)) vertices each; the remaining vertices isolated."""
    if s < 0 or m < 0:
        raise ParameterError("counts must be non-negative")
    if s == 0:
        return Instance(Graph.from_edges(n, []), "cliques-plus-independent", {"s": 0, "clique_size": 0, "m": 0})
    c = math.ceil(math.sqrt(2 * m / s))
    if s * c > n:
        raise ParameterError(f"{s} cliques of size {c} do not fit in {n} vertices")
    edges = []
    for b in range(s):
        base = b * c
        edges += [(base + i, base + j) for i in range(c) for j in range(i + 1, c)]
    g = Graph.from_edges(n, edges)
    return Instance(g, "cliques-plus-independent", {"s": s, "clique_size": c, "m": g.m})


def gen_chunks(n: int, m: int, eps: float, side: str) -> Instance:
    """alpha chunks of beta vertices, each a clique (dense) or edgeless (sparse), then isolated vertices.

    side='low' makes ceil((1/2 + eps) alpha) chunks sparse, side='high' makes
    floor((1/2 - eps) alpha) sparse. Reports realized m and the rounding slack of
    the high-low gap against its nominal value 4 eps m.
    """
    if side not in ("low", "high"):
        raise ParameterError("side must be 'low' or 'high'")
    if not 0 < eps <= 0.5:
        raise ParameterError("eps must lie in (0, 1/2]")
    beta = math.ceil(eps * math.sqrt(m))
    alpha = math.ceil(4 / eps**2)
    if alpha * beta > n:
        raise ParameterError(f"{alpha} chunks of {beta} vertices exceed n={n}")
    sparse_low = min(alpha, math.ceil((0.5 + eps) * alpha))
    sparse_high = max(0, math.floor((0.5 - eps) * alpha))
    sparse = sparse_low if side == "low" else sparse_high
    dense = alpha - sparse
    edges = []
    for b in range(dense):
        base = b * beta
        edges += [(base + i, base + j) for i in range(beta) for j in range(i + 1, beta)]
    g = Graph.from_edges(n, edges)
    per = beta * (beta - 1) // 2
    gap = (sparse_low - sparse_high) * per
    nominal = 4 * eps * m
    slack = abs(gap - nominal) / nominal if nominal else 0.0
    flags = []
    if eps < 4 * math.sqrt(m) / n:
        flags.append("eps below the hard regime 4 sqrt(m)/n")
    params = {"alpha": alpha, "beta": beta, "dense": dense, "sparse": sparse, "m": g.m,
              "target_m": m, "gap": gap, "rounding_slack": slack}
    return Instance(g, "chunks", params, flags)


def sections_sizes(n: int, m: int, T: int) -> tuple[int, int, int]:
    """(number of sections, group size, non-section vertex count)."""
    ell = math.ceil(math.sqrt(n * m / T))
    g = math.ceil(math.sqrt(n * T / m))
    s = math.ceil(m / n)
    return ell, g, s


def gen_sections(n: int, m: int, T: int, x) -> Instance:
    """One section per bit of x, each four groups of g vertices, plus s shared vertices.

    Bit 0 joins groups 1 and 2 completely; bit 1 joins groups 3 and 4. Groups 3
    and 4 of every section are joined to all shared vertices, so a set bit closes
    g*g*s >= T triangles and the all-zero vector leaves the graph triangle-free.
    """
    if T < 1 or n < 1 or m < 1:
        raise ParameterError("n, m, T must be positive")
    if T > m**3 / n**3:
        raise ParameterError("T exceeds m^3/n^3")
    ell, g, s = sections_sizes(n, m, T)
    x = [int(b) for b in x]
    if len(x) != ell:
        raise ParameterError(f"x must have length {ell}")
    total = 4 * g * ell + s
    shared = np.arange(4 * g * ell, total)
    parts = []
    for i, bit in enumerate(x):
        base = 4 * g * i
        groups = [np.arange(base + j * g, base + (j + 1) * g) for j in range(4)]
        a, b = (groups[0], groups[1]) if bit == 0 else (groups[2], groups[3])
        parts.append(np.stack(np.meshgrid(a, b, indexing="ij"), axis=-1).reshape(-1, 2))
        for grp in (groups[2], groups[3]):
            parts.append(np.stack(np.meshgrid(grp, shared, indexing="ij"), axis=-1).reshape(-1, 2))
    edges = np.concatenate(parts) if parts else np.zeros((0, 2), dtype=np.int64)
    graph = Graph.from_edges(total, edges)
    planted = g * g * s * sum(x)
    params = {"sections": ell, "group": g, "shared": s, "n": total, "m": graph.m,
              "requested_T": T, "planted_T": planted}
    return Instance(graph, "sections", params)


def gen_instance(family: str, seed=None, **kw) -> Instance:
    """Dispatch by family name; used by the CLI and experiment runner."""
    if family == "er":
        g = gen_er(kw["n"], kw["m"], seed)
        return Instance(g, "er", {"n": g.n, "m": g.m, "seed": seed})
    if family == "complete":
        g = complete(kw["n"])
        return Instance(g, "complete", {"n": g.n, "m": g.m})
    if family == "star":
        g = star(kw["n"] - 1)
        return Instance(g, "star", {"n": g.n, "m": g.m})
    if family == "cycle":
        g = cycle(kw["n"])
        return Instance(g, "cycle", {"n": g.n, "m": g.m})
    if family == "cliques-plus-independent":
        return gen_cliques_plus_independent(kw["n"], kw["s"], kw["m"])
    if family == "chunks":
        return gen_chunks(kw["n"], kw["m"], kw["eps"], kw["side"])
    if family == "sections":
        x = kw.get("x")
        if x is None:
            ell, _, _ = sections_sizes(kw["n"], kw["m"], kw["T"])
            ones = int(kw.get("ones", 1))
            rng = make_rng(seed)
            x = np.zeros(ell, dtype=int)
            x[rng.choice(ell, size=min(ones, ell), replace=False)] = 1
        return gen_sections(kw["n"], kw["m"], kw["T"], x)
    raise ParameterError(f"unknown family {family!r}")
