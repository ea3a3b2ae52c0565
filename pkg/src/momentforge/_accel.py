"""JIT switch.

Hot kernels are compiled with numba unless ``MOMENTFORGE_DISABLE_NUMBA`` is
set to a truthy value (or numba is not importable), in which case the pure
numpy implementations in :mod:`momentforge.kernels` are used instead.
"""
import os

_FLAG = os.environ.get("MOMENTFORGE_DISABLE_NUMBA", "").strip().lower()

try:
    import numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None

HAVE_NUMBA = numba is not None
USE_NUMBA = HAVE_NUMBA and _FLAG not in ("1", "true", "yes", "on")


def njit(func):
    """Compile ``func`` in nopython mode when numba is available.

    The original Python function stays reachable as ``.py_func`` in both
    cases, so tests can exercise the interpreted path directly.
    """
    if not HAVE_NUMBA:
        func.py_func = func
        return func
    return numba.njit(cache=True, nogil=True)(func)
