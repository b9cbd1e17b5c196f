"""Optional numba acceleration.

Kernels are written once as plain Python over numpy arrays and compiled with
``numba.njit`` when available. Set ``DRIFTLAB_DISABLE_NUMBA=1`` to force the
pure-numpy code paths (useful for debugging and for the benchmark).
"""
import os

_DISABLED = os.environ.get("DRIFTLAB_DISABLE_NUMBA", "").strip().lower() in {"1", "true", "yes", "on"}

try:
    import numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None

HAVE_NUMBA = numba is not None and not _DISABLED

JIT_OPTIONS = {"nogil": True, "cache": True}


def jit(func):
    """Compile ``func`` with numba if acceleration is enabled, else return it untouched."""
    if numba is None:
        return func
    return numba.njit(**JIT_OPTIONS)(func)
