"""Seed fan-out and counter-based 64-bit hashing (splitmix64)."""
from __future__ import annotations

import numpy as np

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15
_M1 = 0xBF58476D1CE4E5B9
_M2 = 0x94D049BB133111EB


def mix64(z: int) -> int:
    z &= MASK64
    z = ((z ^ (z >> 30)) * _M1) & MASK64
    z = ((z ^ (z >> 27)) * _M2) & MASK64
    return z ^ (z >> 31)


def derive_seed(master: int, index: int) -> int:
    """Child seed for stream `index` of a master seed; independent of other indices."""
    return mix64(mix64(int(master) & MASK64) + (int(index) + 1) * GOLDEN)


def hash64(seed: int, ids) -> np.ndarray:
    """Keyed hash of each id: the splitmix64 output at counter id+1 of a stream keyed by seed."""
    key = np.uint64(mix64(int(seed) & MASK64))
    x = np.asarray(ids, dtype=np.uint64)
    with np.errstate(over="ignore"):
        z = key + (x + np.uint64(1)) * np.uint64(GOLDEN)
        z = (z ^ (z >> np.uint64(30))) * np.uint64(_M1)
        z = (z ^ (z >> np.uint64(27))) * np.uint64(_M2)
        z = z ^ (z >> np.uint64(31))
    return z


def unit_interval(raw: np.ndarray) -> np.ndarray:
    """Map 64-bit integers H to the reals (H+1)/2^64 in (0, 1] (rounded to double)."""
    return (raw.astype(np.float64) + 1.0) * 2.0**-64


def make_rng(seed=None) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def draw_seed(rng: np.random.Generator) -> int:
    """A fresh 64-bit seed taken from a generator (used to seed compiled kernels)."""
    return int(rng.integers(0, 2**63 - 1, dtype=np.int64)) * 2 + int(rng.integers(0, 2))
