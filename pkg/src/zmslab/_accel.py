"""Backend selection for the hot kernels.

Every kernel in this package exists twice: a numba ``@njit`` version and a
pure-numpy version.  The numba path is used when numba imports cleanly and
``ZMSLAB_DISABLE_NUMBA`` is unset (or ``0``).  Both paths are importable at
all times so the benchmark and the equivalence tests can run them side by
side.
"""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor

import numpy as np

_FLAG = os.environ.get("ZMSLAB_DISABLE_NUMBA", "0").strip().lower()

try:
    import numba

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None
    HAVE_NUMBA = False

USE_NUMBA = HAVE_NUMBA and _FLAG in ("", "0", "false", "no")

_threads = 1


def njit(*args, **kwargs):
    """``numba.njit`` when numba is installed, identity decorator otherwise."""
    kwargs.setdefault("cache", True)
    if HAVE_NUMBA:
        return numba.njit(*args, **kwargs)
    if args and callable(args[0]):
        return args[0]
    return lambda f: f


def backend_name() -> str:
    return "numba" if USE_NUMBA else "numpy"


def set_threads(n: int) -> None:
    """Set the worker count used by :func:`chunked_map`."""
    global _threads
    if n < 1:
        raise ValueError("thread count must be >= 1")
    _threads = int(n)


def get_threads() -> int:
    return _threads


def chunked_map(func, n_items: int, chunk: int, threads: int | None = None) -> None:
    """Call ``func(lo, hi)`` over ``[0, n_items)`` in fixed-size chunks.

    Chunks write disjoint output slices, so the result does not depend on the
    worker count or on scheduling order.
    """
    bounds = [(lo, min(lo + chunk, n_items)) for lo in range(0, n_items, chunk)]
    workers = _threads if threads is None else threads
    if workers <= 1 or len(bounds) <= 1:
        for lo, hi in bounds:
            func(lo, hi)
        return
    with ThreadPoolExecutor(max_workers=workers) as pool:
        list(pool.map(lambda b: func(*b), bounds))


def as_f64(x) -> np.ndarray:
    return np.ascontiguousarray(x, dtype=np.float64)
