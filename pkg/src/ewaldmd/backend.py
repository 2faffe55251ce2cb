"""Backend (numba vs numpy) and worker-count selection.

The compute backend is chosen once from the ``EWALDMD_BACKEND`` environment
variable (``auto``, ``numba`` or ``numpy``) and can be switched at runtime
with :func:`set_backend`, which benchmarks and tests use to compare the two
paths in-process.  Worker counts resolve from an explicit argument, the
``EWALDMD_THREADS`` environment variable, or the config key, in that order;
0 means auto-detect.
"""

import os
from concurrent.futures import ThreadPoolExecutor

try:
    import numba

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a hard dependency here
    numba = None
    HAVE_NUMBA = False

BACKEND_ENV = "EWALDMD_BACKEND"
THREADS_ENV = "EWALDMD_THREADS"

_VALID = ("numba", "numpy")


def _resolve_initial():
    name = os.environ.get(BACKEND_ENV, "auto").strip().lower()
    if name in ("auto", ""):
        return "numba" if HAVE_NUMBA else "numpy"
    if name not in _VALID:
        raise ValueError(
            f"{BACKEND_ENV} must be one of auto|numba|numpy, got {name!r}"
        )
    if name == "numba" and not HAVE_NUMBA:
        raise ImportError(f"{BACKEND_ENV}=numba but numba is not importable")
    return name


_backend = _resolve_initial()


def get_backend():
    """Return the active backend name, ``numba`` or ``numpy``."""
    return _backend


def set_backend(name):
    """Switch the active backend; returns the previous one."""
    global _backend
    if name not in _VALID:
        raise ValueError(f"backend must be one of {_VALID}, got {name!r}")
    if name == "numba" and not HAVE_NUMBA:
        raise ImportError("numba backend requested but numba is not importable")
    prev = _backend
    _backend = name
    return prev


_jit_cache = {}


def jit_kernel(func, fastmath=False):
    """Compile a scalar kernel body for the numba path (no-op without numba).

    Dispatchers are cached per (function, fastmath) so kernels recreated for
    new parameter sets reuse the existing machine code.  fastmath is opted
    into only by bodies with no boundary predicates (the k-space loops),
    where reassociation cannot flip a cutoff decision.
    """
    if not HAVE_NUMBA:
        return func
    key = (func, fastmath)
    disp = _jit_cache.get(key)
    if disp is None:
        disp = numba.njit(nogil=True, fastmath=fastmath)(func)
        _jit_cache[key] = disp
    return disp


def jit_helper(func):
    """Mark a helper callable from both jitted bodies and plain Python."""
    if not HAVE_NUMBA:
        return func
    return numba.extending.register_jitable(func)


def resolve_workers(requested=None):
    """Resolve a worker count; 0 or None means consult env, then default to 1."""
    if requested is None:
        env = os.environ.get(THREADS_ENV, "").strip()
        requested = int(env) if env else 1
    requested = int(requested)
    if requested < 0:
        raise ValueError(f"worker count must be >= 0, got {requested}")
    if requested == 0:
        requested = os.cpu_count() or 1
    return requested


_pools = {}


def worker_pool(n):
    """Shared thread pool for n-way block execution (created on first use)."""
    pool = _pools.get(n)
    if pool is None:
        pool = ThreadPoolExecutor(max_workers=n, thread_name_prefix="ewaldmd")
        _pools[n] = pool
    return pool
