"""Sublinear-query graph algorithms under modeled access oracles."""
from .access_oracle import (AccessModel, HashOrderSimulator, ModelKind, Oracle, QueryCounter,
                            ensure_hash_ordered, simulate_hash_order, snapshot_counters)
from .errors import (AttemptCapError, CapabilityError, ConfigError, ContractError, DomainError,
                     EmptyGraphError, ParameterError, ParseError, RangeError, UnsatisfiableError,
                     ValidationError)
from .graph_core import DirectedEdge, Graph, HashAssignment, attach_hashes, dump_edge_list, load_edge_list
from .kernels import BACKEND

__version__ = "0.1.0"
