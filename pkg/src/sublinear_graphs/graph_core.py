"""Undirected simple graphs in CSR form, with id-ordered and hash-ordered adjacency."""
from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import ParseError, ValidationError
from .rng import hash64, unit_interval


class DirectedEdge(NamedTuple):
    src: int
    dst: int


class Graph:
    """Immutable undirected simple graph.

    Adjacency is stored as CSR arrays with each row sorted by vertex id.
    Directed edge slots are the positions of `indices`: slot s is the edge
    (src_of_slot[s], indices[s]).
    """

    __slots__ = ("n", "m", "indptr", "indices", "_deg", "_src", "_cache")

    def __init__(self, n: int, indptr: np.ndarray, indices: np.ndarray):
        self.n = int(n)
        self.indptr = np.ascontiguousarray(indptr, dtype=np.int64)
        self.indices = np.ascontiguousarray(indices, dtype=np.int64)
        self.indptr.setflags(write=False)
        self.indices.setflags(write=False)
        self.m = len(self.indices) // 2
        self._deg = np.diff(self.indptr)
        self._deg.setflags(write=False)
        self._src = None
        self._cache = {}

    @classmethod
    def from_edges(cls, n: int, edges) -> "Graph":
        """Build from an iterable or (k, 2) array of undirected pairs; validates."""
        arr = np.asarray(list(edges) if not isinstance(edges, np.ndarray) else edges, dtype=np.int64)
        if arr.size == 0:
            arr = arr.reshape(0, 2)
        if arr.ndim != 2 or arr.shape[1] != 2:
            raise ValidationError("edges must be pairs")
        n = int(n)
        if len(arr) and (arr.min() < 0 or arr.max() >= n):
            raise ValidationError(f"vertex id out of range [0, {n})")
        if np.any(arr[:, 0] == arr[:, 1]):
            bad = arr[arr[:, 0] == arr[:, 1]][0]
            raise ValidationError(f"self-loop at vertex {bad[0]}")
        lo = np.minimum(arr[:, 0], arr[:, 1])
        hi = np.maximum(arr[:, 0], arr[:, 1])
        keys = lo * max(n, 1) + hi
        uniq, counts = np.unique(keys, return_counts=True)
        if len(uniq) != len(keys):
            dup = uniq[counts > 1][0]
            raise ValidationError(f"duplicate edge {dup // n} {dup % n}")
        src = np.concatenate([lo, hi])
        dst = np.concatenate([hi, lo])
        order = np.lexsort((dst, src))
        src, dst = src[order], dst[order]
        indptr = np.zeros(n + 1, dtype=np.int64)
        np.add.at(indptr, src + 1, 1)
        np.cumsum(indptr, out=indptr)
        return cls(n, indptr, dst)

    # basic accessors
    @property
    def degrees(self) -> np.ndarray:
        return self._deg

    def degree(self, v: int) -> int:
        return int(self._deg[v])

    def neighbors(self, v: int) -> np.ndarray:
        return self.indices[self.indptr[v]:self.indptr[v + 1]]

    @property
    def adjacency(self) -> list[tuple[int, ...]]:
        return [tuple(int(x) for x in self.neighbors(v)) for v in range(self.n)]

    @property
    def slot_sources(self) -> np.ndarray:
        """Source vertex of every directed slot."""
        if self._src is None:
            src = np.repeat(np.arange(self.n, dtype=np.int64), self._deg)
            src.setflags(write=False)
            self._src = src
        return self._src

    def has_edge(self, u: int, v: int) -> bool:
        if u == v:
            return False
        if self._deg[u] > self._deg[v]:
            u, v = v, u
        row = self.neighbors(u)
        i = np.searchsorted(row, v)
        return bool(i < len(row) and row[i] == v)

    def slot_of(self, u, v) -> np.ndarray | int:
        """Slot index of directed edge (u, v); vectorized over arrays. Assumes the edge exists."""
        u = np.asarray(u, dtype=np.int64)
        v = np.asarray(v, dtype=np.int64)
        # rows are id-sorted, so the global key src*n + dst is sorted along slots
        keys = self.cached("slot_keys", lambda: self.slot_sources * self.n + self.indices)
        out = np.searchsorted(keys, u * self.n + v)
        return int(out) if out.ndim == 0 else out

    def edge_array(self) -> np.ndarray:
        """Undirected edges as an (m, 2) array with u < v, in slot order."""
        src = self.slot_sources
        mask = src < self.indices
        return np.stack([src[mask], self.indices[mask]], axis=1)

    def directed_edges(self) -> np.ndarray:
        return np.stack([self.slot_sources, self.indices], axis=1)

    def cached(self, key, factory):
        """Per-graph memo for derived read-only data (e.g. triangle counts per slot)."""
        if key not in self._cache:
            self._cache[key] = factory()
        return self._cache[key]

    def __repr__(self) -> str:
        return f"Graph(n={self.n}, m={self.m})"

    def __eq__(self, other) -> bool:
        return (isinstance(other, Graph) and self.n == other.n
                and np.array_equal(self.indptr, other.indptr)
                and np.array_equal(self.indices, other.indices))

    __hash__ = None


def load_edge_list(text: str) -> Graph:
    """Parse the edge-list format: optional "n=<count>" header, then one "u v" per line.

    Blank lines and lines starting with '#' are ignored.
    """
    n_decl = None
    pairs = []
    seen_content = False
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if not seen_content and line.startswith("n="):
            seen_content = True
            try:
                n_decl = int(line[2:].strip())
            except ValueError:
                raise ParseError(line_no, f"bad header {line!r}") from None
            if n_decl < 0:
                raise ParseError(line_no, "negative vertex count")
            continue
        seen_content = True
        parts = line.split()
        if len(parts) != 2:
            raise ParseError(line_no, f"expected two ids, got {line!r}")
        try:
            u, v = int(parts[0]), int(parts[1])
        except ValueError:
            raise ParseError(line_no, f"non-integer id in {line!r}") from None
        if u < 0 or v < 0:
            raise ParseError(line_no, "negative vertex id")
        pairs.append((u, v))
    max_id = max((max(p) for p in pairs), default=-1)
    n = max_id + 1
    if n_decl is not None:
        if n_decl < n:
            raise ValidationError(f"header declares n={n_decl} but id {max_id} occurs")
        n = n_decl
    return Graph.from_edges(n, pairs)


def read_edge_list(path) -> Graph:
    with open(path, encoding="utf-8") as fh:
        return load_edge_list(fh.read())


def dump_edge_list(graph: Graph) -> str:
    lines = [f"n={graph.n}"]
    lines.extend(f"{u} {v}" for u, v in graph.edge_array().tolist())
    return "\n".join(lines) + "\n"


@dataclass(frozen=True, eq=False)
class HashAssignment:
    """Per-vertex 64-bit hashes and the adjacency re-sorted by (hash, id).

    `raw[v]` is the integer H; `values[v]` is (H+1)/2^64 as a double.
    `sorted_indices` shares `graph.indptr`; row v lists N(v) ascending by (H, id).
    """

    seed: int
    raw: np.ndarray
    values: np.ndarray
    sorted_indices: np.ndarray

    def key(self, v: int) -> tuple[int, int]:
        return int(self.raw[v]), int(v)

    def sorted_neighbors(self, graph: Graph, v: int) -> np.ndarray:
        return self.sorted_indices[graph.indptr[v]:graph.indptr[v + 1]]

    def __eq__(self, other) -> bool:
        return (isinstance(other, HashAssignment) and self.seed == other.seed
                and np.array_equal(self.raw, other.raw)
                and np.array_equal(self.sorted_indices, other.sorted_indices))

    __hash__ = None


def hash_sorted_rows(graph: Graph, raw: np.ndarray) -> np.ndarray:
    # global rank of each vertex under (H, id); ranks give one sortable integer key
    order = np.lexsort((np.arange(graph.n), raw))
    rank = np.empty(graph.n, dtype=np.int64)
    rank[order] = np.arange(graph.n)
    src = graph.slot_sources
    perm = np.lexsort((rank[graph.indices], src))
    return graph.indices[perm]


def attach_hashes(graph: Graph, seed: int) -> HashAssignment:
    raw = hash64(seed, np.arange(graph.n))
    values = unit_interval(raw)
    sorted_idx = hash_sorted_rows(graph, raw)
    for arr in (raw, values, sorted_idx):
        arr.setflags(write=False)
    return HashAssignment(int(seed), raw, values, sorted_idx)

