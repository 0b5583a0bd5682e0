"""Selects the compiled kernels when available, else the pure-Python twins.

Set SUBLINEAR_GRAPHS_PURE=1 to force the Python backend.
"""
import os

from . import _kernels_py

BACKEND = "python"
_impl = _kernels_py
if not os.environ.get("SUBLINEAR_GRAPHS_PURE"):
    try:
        from . import _kernels as _impl  # type: ignore[no-redef]
        BACKEND = "cython"
    except ImportError:  # extension not built
        _impl = _kernels_py

walk_attempts = _impl.walk_attempts
walk_samples = _impl.walk_samples
slot_triangles = _impl.slot_triangles
tri_rounds = _impl.tri_rounds


def backend(name: str):
    """Return the kernel module for 'cython' or 'python' explicitly."""
    if name == "python":
        return _kernels_py
    if name == "cython":
        from . import _kernels
        return _kernels
    raise ValueError(f"unknown backend {name!r}")
