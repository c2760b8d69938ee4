"""Optional numba acceleration.

Set ``MMGMM_DISABLE_NUMBA=1`` in the environment to force the pure-numpy
kernels even when numba is importable. The flag is read once, at import.
"""
import os


def _noop_jit(*args, **kwargs):
    """Stand-in for ``numba.njit`` that returns the function unchanged."""
    if len(args) == 1 and callable(args[0]) and not kwargs:
        return args[0]

    def wrap(f):
        return f

    return wrap


def _have_numba():
    try:
        import numba  # noqa: F401

        return True
    except ImportError:
        return False


HAVE_NUMBA = _have_numba()
DISABLED = os.environ.get("MMGMM_DISABLE_NUMBA", "").strip().lower() in {"1", "true", "yes", "on"}

# True when the numba kernels are the ones dispatched at runtime
USE_NUMBA = HAVE_NUMBA and not DISABLED

if HAVE_NUMBA:
    from numba import njit
else:
    njit = _noop_jit
