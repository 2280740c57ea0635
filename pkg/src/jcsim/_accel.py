"""Optional numba acceleration.

Kernels are written once in plain Python/NumPy and compiled with
``numba.njit`` when numba is importable. Setting ``JCSIM_DISABLE_NUMBA=1``
forces the pure-numpy fallback path (vectorised implementations are then
used instead of the loop kernels).
"""
import os
import warnings

_disabled = os.environ.get("JCSIM_DISABLE_NUMBA", "").strip().lower() in {"1", "true", "yes"}

try:
    if _disabled:
        raise ImportError
    with warnings.catch_warnings():
        # an outdated system TBB only disables one optional threading layer
        warnings.filterwarnings("ignore", message=".*TBB.*")
        import numba
    # prefer layers that do not depend on the system TBB version
    numba.config.THREADING_LAYER_PRIORITY = ["omp", "workqueue", "tbb"]

    HAVE_NUMBA = True
except ImportError:
    numba = None
    HAVE_NUMBA = False


def njit(*args, **kwargs):
    """``numba.njit`` if available, otherwise the identity decorator."""
    if HAVE_NUMBA:
        kwargs.setdefault("cache", True)
        return numba.njit(*args, **kwargs)
    if len(args) == 1 and callable(args[0]) and not kwargs:
        return args[0]
    return lambda fn: fn


def set_threads():
    """Apply ``JCSIM_THREADS`` as a cap on numba's worker pool."""
    value = os.environ.get("JCSIM_THREADS")
    if not value or not HAVE_NUMBA:
        return
    try:
        n = max(1, min(int(value), numba.config.NUMBA_NUM_THREADS))
    except ValueError:
        return
    numba.set_num_threads(n)


def backend_name():
    return "numba" if HAVE_NUMBA else "numpy"
