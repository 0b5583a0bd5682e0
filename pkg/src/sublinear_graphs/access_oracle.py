"""Capability-checked query gateway with per-kind query counters."""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from enum import Enum
from typing import Union

import numpy as np

from .errors import CapabilityError, EmptyGraphError, RangeError
from .graph_core import DirectedEdge, Graph, HashAssignment, attach_hashes
from .rng import draw_seed, make_rng

QUERY_KINDS = (
    "random_vertex", "degree", "ith_neighbor", "hash", "pair",
    "full_neighborhood", "batched_block", "random_edge",
)


class ModelKind(str, Enum):
    INDEXED = "indexed"
    INDEXED_PAIRS = "indexed_pairs"
    HASH_ORDERED = "hash_ordered"
    FULL_NEIGHBORHOOD = "full_neighborhood"
    BATCHED = "batched"


_NEIGHBOR_CAPS = {
    ModelKind.INDEXED: frozenset({"degree", "ith_neighbor"}),
    ModelKind.INDEXED_PAIRS: frozenset({"degree", "ith_neighbor", "pair"}),
    ModelKind.HASH_ORDERED: frozenset({"degree", "ith_neighbor", "hash", "pair"}),
    ModelKind.FULL_NEIGHBORHOOD: frozenset({"full_neighborhood"}),
    ModelKind.BATCHED: frozenset({"batched_block"}),
}


@dataclass(frozen=True)
class AccessModel:
    """Which queries an oracle answers.

    `shuffle_seed` replaces id order of indexed/batched adjacency by a seeded
    permutation per row, standing in for an adversarial neighbor order.
    """

    kind: ModelKind
    random_vertex: bool = True
    random_edge: bool = False
    block_size: int | None = None
    shuffle_seed: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "kind", ModelKind(self.kind))

    def allows(self, query_kind: str) -> bool:
        if query_kind == "random_vertex":
            return self.random_vertex
        if query_kind == "random_edge":
            return self.random_edge
        return query_kind in _NEIGHBOR_CAPS[self.kind]

    @property
    def name(self) -> str:
        return self.kind.value

    @classmethod
    def indexed(cls, **kw) -> "AccessModel":
        return cls(ModelKind.INDEXED, **kw)

    @classmethod
    def indexed_pairs(cls, **kw) -> "AccessModel":
        return cls(ModelKind.INDEXED_PAIRS, **kw)

    @classmethod
    def hash_ordered(cls, **kw) -> "AccessModel":
        return cls(ModelKind.HASH_ORDERED, **kw)

    @classmethod
    def full_neighborhood(cls, **kw) -> "AccessModel":
        return cls(ModelKind.FULL_NEIGHBORHOOD, **kw)

    @classmethod
    def batched(cls, block_size: int | None = None, **kw) -> "AccessModel":
        return cls(ModelKind.BATCHED, block_size=block_size, **kw)


@dataclass
class QueryCounter:
    random_vertex: int = 0
    degree: int = 0
    ith_neighbor: int = 0
    hash: int = 0
    pair: int = 0
    full_neighborhood: int = 0
    batched_block: int = 0
    random_edge: int = 0

    @property
    def total(self) -> int:
        return sum(getattr(self, k) for k in QUERY_KINDS)

    def to_dict(self) -> dict:
        d = {k: getattr(self, k) for k in QUERY_KINDS}
        d["total"] = self.total
        return d

    def copy(self) -> "QueryCounter":
        return dataclasses.replace(self)

    def __sub__(self, other: "QueryCounter") -> "QueryCounter":
        return QueryCounter(**{k: getattr(self, k) - getattr(other, k) for k in QUERY_KINDS})


# request types for the generic query() entry point
@dataclass(frozen=True)
class RandomVertex:
    pass


@dataclass(frozen=True)
class Degree:
    v: int


@dataclass(frozen=True)
class IthNeighbor:
    v: int
    i: int


@dataclass(frozen=True)
class Hash:
    v: int


@dataclass(frozen=True)
class Pair:
    u: int
    v: int


@dataclass(frozen=True)
class FullNeighborhood:
    v: int


@dataclass(frozen=True)
class BatchedNeighbors:
    v: int
    block: int


@dataclass(frozen=True)
class RandomEdge:
    pass


Request = Union[RandomVertex, Degree, IthNeighbor, Hash, Pair, FullNeighborhood, BatchedNeighbors, RandomEdge]


def _shuffled_rows(graph: Graph, seed: int) -> np.ndarray:
    # permute within each row: sort slots by (row, random key)
    keys = make_rng(seed).random(len(graph.indices))
    perm = np.lexsort((keys, graph.slot_sources))
    return graph.indices[perm]


class Oracle:
    """Query gateway over a graph. Every answered query adds one to its counter.

    Scalar methods mirror the request types; the plural methods answer a
    vector of requests and charge one unit per element.
    """

    def __init__(self, graph: Graph, model: AccessModel | str = ModelKind.HASH_ORDERED,
                 seed=None, hashes: HashAssignment | None = None):
        if not isinstance(model, AccessModel):
            model = AccessModel(ModelKind(model))
        self._graph = graph
        self.model = model
        self.rng = make_rng(seed)
        self.n = graph.n
        self.counters = QueryCounter()
        self.vertices_touched = 0
        if model.kind is ModelKind.HASH_ORDERED:
            self.hashes = hashes if hashes is not None else attach_hashes(graph, draw_seed(self.rng))
            self._rows = self.hashes.sorted_indices
        else:
            self.hashes = hashes
            if model.shuffle_seed is not None:
                self._rows = _shuffled_rows(graph, model.shuffle_seed)
            else:
                self._rows = graph.indices
        if model.block_size is not None:
            self.block_size = max(1, int(model.block_size))
        else:
            self.block_size = max(1, -(-2 * graph.m // max(graph.n, 1)))
        self._hash_view = None

    # capability plumbing
    def allows(self, kind: str) -> bool:
        return self.model.allows(kind)

    def require(self, *kinds: str) -> None:
        for kind in kinds:
            if not self.model.allows(kind):
                raise CapabilityError(self.model.name, kind)

    def charge(self, kind: str, count: int = 1) -> None:
        """Record `count` queries of `kind` answered on the caller's behalf (kernels)."""
        self.require(kind)
        setattr(self.counters, kind, getattr(self.counters, kind) + int(count))

    def snapshot_counters(self) -> QueryCounter:
        return self.counters.copy()

    @property
    def is_native(self) -> bool:
        return True

    def kernel_view(self) -> tuple[np.ndarray, np.ndarray]:
        """CSR arrays in this model's neighbor order, for compiled kernels that self-charge."""
        return self._graph.indptr, self._rows

    def hash_view(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(indptr, hash-sorted rows, hash value of each row entry), for self-charging samplers."""
        self.require("hash")
        if self._hash_view is None:
            vals = self.hashes.values[self._rows]
            self._hash_view = (self._graph.indptr, self._rows, vals)
        return self._hash_view

    def _check_vertex(self, v: int) -> int:
        if not 0 <= v < self.n:
            raise RangeError(f"vertex {v} outside [0, {self.n})")
        return v

    def _check_vertices(self, vs) -> np.ndarray:
        vs = np.asarray(vs, dtype=np.int64)
        if vs.size and (vs.min() < 0 or vs.max() >= self.n):
            raise RangeError(f"vertex outside [0, {self.n})")
        return vs

    # scalar queries
    def random_vertex(self) -> int:
        self.require("random_vertex")
        if self.n == 0:
            raise EmptyGraphError("no vertices")
        self.counters.random_vertex += 1
        return int(self.rng.integers(self.n))

    def degree(self, v: int) -> int:
        self.require("degree")
        self._check_vertex(v)
        self.counters.degree += 1
        return int(self._graph.degrees[v])

    def ith_neighbor(self, v: int, i: int) -> int:
        """The i-th neighbor of v, 1-based, in this model's order."""
        self.require("ith_neighbor")
        self._check_vertex(v)
        d = self._graph.degrees[v]
        if not 1 <= i <= d:
            raise RangeError(f"neighbor index {i} outside [1, {d}] for vertex {v}")
        self.counters.ith_neighbor += 1
        return int(self._rows[self._graph.indptr[v] + i - 1])

    def hash(self, v: int) -> float:
        self.require("hash")
        self._check_vertex(v)
        self.counters.hash += 1
        return float(self.hashes.values[v])

    def pair(self, u: int, v: int) -> bool:
        self.require("pair")
        self._check_vertex(u)
        self._check_vertex(v)
        self.counters.pair += 1
        return self._graph.has_edge(u, v)

    def full_neighborhood(self, v: int) -> np.ndarray:
        self.require("full_neighborhood")
        self._check_vertex(v)
        self.counters.full_neighborhood += 1
        return self._graph.neighbors(v).copy()

    def batched_block(self, v: int, block: int) -> np.ndarray:
        """Neighbors (block-1)*b+1 .. block*b of v (1-based); empty past the end."""
        self.require("batched_block")
        self._check_vertex(v)
        if block < 1:
            raise RangeError(f"block index {block} < 1")
        self.counters.batched_block += 1
        lo = self._graph.indptr[v]
        hi = self._graph.indptr[v + 1]
        a = min(hi, lo + (block - 1) * self.block_size)
        b = min(hi, a + self.block_size)
        out = self._rows[a:b].copy()
        self.vertices_touched += len(out)
        return out

    def random_edge(self) -> DirectedEdge:
        self.require("random_edge")
        if self._graph.m == 0:
            raise EmptyGraphError("no edges")
        self.counters.random_edge += 1
        s = int(self.rng.integers(2 * self._graph.m))
        return DirectedEdge(int(self._graph.slot_sources[s]), int(self._graph.indices[s]))

    def query(self, request: Request):
        if isinstance(request, RandomVertex):
            return self.random_vertex()
        if isinstance(request, Degree):
            return self.degree(request.v)
        if isinstance(request, IthNeighbor):
            return self.ith_neighbor(request.v, request.i)
        if isinstance(request, Hash):
            return self.hash(request.v)
        if isinstance(request, Pair):
            return self.pair(request.u, request.v)
        if isinstance(request, FullNeighborhood):
            return self.full_neighborhood(request.v)
        if isinstance(request, BatchedNeighbors):
            return self.batched_block(request.v, request.block)
        if isinstance(request, RandomEdge):
            return self.random_edge()
        raise TypeError(f"unknown request {request!r}")

    # vector queries
    def random_vertices(self, k: int) -> np.ndarray:
        self.require("random_vertex")
        if k and self.n == 0:
            raise EmptyGraphError("no vertices")
        self.counters.random_vertex += int(k)
        return self.rng.integers(0, max(self.n, 1), size=int(k))

    def degrees(self, vs) -> np.ndarray:
        self.require("degree")
        vs = self._check_vertices(vs)
        self.counters.degree += vs.size
        return self._graph.degrees[vs]

    def ith_neighbors(self, vs, idx) -> np.ndarray:
        self.require("ith_neighbor")
        vs = self._check_vertices(vs)
        idx = np.asarray(idx, dtype=np.int64)
        d = self._graph.degrees[vs]
        if np.any((idx < 1) | (idx > d)):
            raise RangeError("neighbor index out of range")
        self.counters.ith_neighbor += vs.size
        return self._rows[self._graph.indptr[vs] + idx - 1]

    def hashes_of(self, vs) -> np.ndarray:
        self.require("hash")
        vs = self._check_vertices(vs)
        self.counters.hash += vs.size
        return self.hashes.values[vs]

    def pairs(self, us, vs) -> np.ndarray:
        self.require("pair")
        us = self._check_vertices(us)
        vs = self._check_vertices(vs)
        self.counters.pair += us.size
        return np.array([self._graph.has_edge(int(a), int(b)) for a, b in zip(us, vs)], dtype=bool)

    def random_edge_slots(self, k: int) -> np.ndarray:
        """Uniform directed edges as slot indices into the id-ordered CSR of the graph."""
        self.require("random_edge")
        if k and self._graph.m == 0:
            raise EmptyGraphError("no edges")
        self.counters.random_edge += int(k)
        return self.rng.integers(0, max(2 * self._graph.m, 1), size=int(k))

    def random_edges(self, k: int) -> np.ndarray:
        s = self.random_edge_slots(k)
        return np.stack([self._graph.slot_sources[s], self._graph.indices[s]], axis=1)

    def charge_scan(self, vs, counts) -> None:
        """Charge hash-ordered scans: counts[j] ith_neighbor+hash queries on vs[j]."""
        total = int(np.sum(counts))
        if total:
            self.charge("ith_neighbor", total)
            self.charge("hash", total)

    # internal access for verification and for self-charging routines
    @property
    def graph(self) -> Graph:
        return self._graph


def snapshot_counters(oracle) -> QueryCounter:
    return oracle.snapshot_counters()


def query(oracle: Oracle, request: Request):
    return oracle.query(request)


class NeighborhoodReader:
    """Reads whole neighborhoods through an oracle, charging each vertex once.

    Cost of first read of N(v): one full_neighborhood query; or floor(d/b)+1
    batched blocks; or one degree query plus d ith_neighbor queries.
    """

    def __init__(self, oracle: Oracle):
        self.oracle = oracle
        self.graph = oracle.graph
        self.fetched = np.zeros(self.graph.n, dtype=np.uint8)
        kind = oracle.model.kind
        if kind is ModelKind.FULL_NEIGHBORHOOD:
            oracle.require("full_neighborhood")
        elif kind is ModelKind.BATCHED:
            oracle.require("batched_block")
        else:
            oracle.require("degree", "ith_neighbor")

    def charge_vertices(self, vs: np.ndarray) -> None:
        """Charge first reads of the given (distinct, not yet charged) vertices."""
        if len(vs) == 0:
            return
        o = self.oracle
        d = self.graph.degrees[vs]
        kind = o.model.kind
        if kind is ModelKind.FULL_NEIGHBORHOOD:
            o.charge("full_neighborhood", len(vs))
        elif kind is ModelKind.BATCHED:
            o.charge("batched_block", int(np.sum(d // o.block_size + 1)))
            o.vertices_touched += int(d.sum())
        else:
            o.charge("degree", len(vs))
            o.charge("ith_neighbor", int(d.sum()))

    def fetch_many(self, vs) -> None:
        vs = np.unique(np.asarray(vs, dtype=np.int64))
        new = vs[self.fetched[vs] == 0]
        self.charge_vertices(new)
        self.fetched[new] = 1

    def fetch(self, v: int) -> np.ndarray:
        if not self.fetched[v]:
            self.charge_vertices(np.array([v], dtype=np.int64))
            self.fetched[v] = 1
        return self.graph.neighbors(v)

    def settle(self, before: np.ndarray) -> None:
        """Charge vertices a kernel marked in `fetched` since the copy `before`."""
        new = np.flatnonzero(self.fetched & ~before)
        self.charge_vertices(new)


class HashOrderSimulator:
    """Hash-ordered access simulated over an oracle without hashes.

    The first hash-ordered access to v reads all of N(v) from the base oracle;
    later accesses are served from the cached, hash-sorted copy. Hash queries
    are answered from the simulator's own virtual hashes at no cost. Virtual
    hashes are keyed on (seed, id), which has the same law as drawing each
    one when its vertex is first seen.
    """

    def __init__(self, base: Oracle, seed=None):
        if isinstance(base, HashOrderSimulator):
            base = base.base
        self.base = base
        self.rng = base.rng
        self.n = base.n
        self.model = AccessModel(ModelKind.HASH_ORDERED, random_vertex=base.model.random_vertex,
                                 random_edge=base.model.random_edge)
        self.reader = NeighborhoodReader(base)
        self.hashes = attach_hashes(base.graph, draw_seed(self.rng) if seed is None else seed)
        self._rows = self.hashes.sorted_indices
        self._hash_view = None

    @property
    def graph(self) -> Graph:
        return self.base.graph

    @property
    def counters(self) -> QueryCounter:
        return self.base.counters

    @property
    def vertices_touched(self) -> int:
        return self.base.vertices_touched

    @property
    def is_native(self) -> bool:
        return False

    def allows(self, kind: str) -> bool:
        if kind in ("degree", "ith_neighbor", "hash"):
            return True
        return self.base.allows(kind)

    def require(self, *kinds: str) -> None:
        for kind in kinds:
            if not self.allows(kind):
                raise CapabilityError(self.model.name, kind)

    def snapshot_counters(self) -> QueryCounter:
        return self.base.snapshot_counters()

    def hash_view(self):
        if self._hash_view is None:
            g = self.base.graph
            self._hash_view = (g.indptr, self._rows, self.hashes.values[self._rows])
        return self._hash_view

    def random_vertex(self) -> int:
        return self.base.random_vertex()

    def random_vertices(self, k: int) -> np.ndarray:
        return self.base.random_vertices(k)

    def degree(self, v: int) -> int:
        return int(self.degrees(np.array([v]))[0])

    def degrees(self, vs) -> np.ndarray:
        vs = self.base._check_vertices(vs)
        unknown = vs[self.reader.fetched[vs] == 0]
        if unknown.size:
            if self.base.allows("degree"):
                self.base.charge("degree", unknown.size)
            else:
                self.reader.fetch_many(unknown)
        return self.base.graph.degrees[vs]

    def ith_neighbor(self, v: int, i: int) -> int:
        return int(self.ith_neighbors(np.array([v]), np.array([i]))[0])

    def ith_neighbors(self, vs, idx) -> np.ndarray:
        vs = self.base._check_vertices(vs)
        idx = np.asarray(idx, dtype=np.int64)
        g = self.base.graph
        if np.any((idx < 1) | (idx > g.degrees[vs])):
            raise RangeError("neighbor index out of range")
        self.reader.fetch_many(vs)
        return self._rows[g.indptr[vs] + idx - 1]

    def hash(self, v: int) -> float:
        self.base._check_vertex(v)
        return float(self.hashes.values[v])

    def hashes_of(self, vs) -> np.ndarray:
        return self.hashes.values[self.base._check_vertices(vs)]

    def pair(self, u: int, v: int) -> bool:
        return self.base.pair(u, v)

    def pairs(self, us, vs) -> np.ndarray:
        return self.base.pairs(us, vs)

    def random_edge(self) -> DirectedEdge:
        return self.base.random_edge()

    def random_edge_slots(self, k: int) -> np.ndarray:
        return self.base.random_edge_slots(k)

    def charge_scan(self, vs, counts) -> None:
        vs = np.asarray(vs, dtype=np.int64)
        self.reader.fetch_many(vs[np.asarray(counts) > 0])


def simulate_hash_order(oracle: Oracle, seed=None) -> HashOrderSimulator:
    return HashOrderSimulator(oracle, seed)


def ensure_hash_ordered(oracle):
    """The oracle itself if it answers hash queries, else a simulating adapter."""
    if oracle.allows("hash"):
        return oracle
    return HashOrderSimulator(oracle)
