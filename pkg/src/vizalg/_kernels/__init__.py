"""Numeric kernels with a compiled fast path.

The Cython extension is used when it was built; otherwise the pure NumPy
implementation takes over. Both produce the same decomposition.
"""
try:
    from ._jacobi import jacobi_eigh

    BACKEND = "cython"
except ImportError:  # pragma: no cover - depends on build environment
    from ._pyjacobi import jacobi_eigh

    BACKEND = "python"

__all__ = ["jacobi_eigh", "BACKEND"]
