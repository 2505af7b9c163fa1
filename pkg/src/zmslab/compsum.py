"""Compensated (Neumaier) summation with a fixed, thread-independent order.

Large arrays are reduced in chunks of ``CHUNK`` elements; each chunk's
partial and compensation are then folded in left to right.  The result depends only on the input array.
"""
from __future__ import annotations

import math
from itertools import chain

import numpy as np

from ._accel import USE_NUMBA, njit

CHUNK = 1024


@njit
def _neumaier_chunks_nb(x, chunk):
    n = x.shape[0]
    nchunks = (n + chunk - 1) // chunk
    s = 0.0
    c = 0.0
    for k in range(nchunks):
        ps = 0.0
        pc = 0.0
        for i in range(k * chunk, min(n, (k + 1) * chunk)):
            v = x[i]
            t = ps + v
            if abs(ps) >= abs(v):
                pc += (ps - t) + v
            else:
                pc += (v - t) + ps
            ps = t
        # fold both the partial and its compensation into the running total
        for v in (ps, pc):
            t = s + v
            if abs(s) >= abs(v):
                c += (s - t) + v
            else:
                c += (v - t) + s
            s = t
    return s + c


def _neumaier_chunks_np(x: np.ndarray, chunk: int) -> float:
    # fsum keeps exact partials across the whole array, so chunking is only
    # there to bound the temporary list
    return math.fsum(chain.from_iterable(x[lo:lo + chunk].tolist()
                                         for lo in range(0, x.shape[0], chunk)))


def csum(x) -> float:
    """Compensated sum of a 1-d float array."""
    x = np.ascontiguousarray(x, dtype=np.float64).ravel()
    if x.size == 0:
        return 0.0
    if USE_NUMBA:
        return float(_neumaier_chunks_nb(x, CHUNK))
    return _neumaier_chunks_np(x, CHUNK * 64)


@njit
def _ccumsum_nb(x, start):
    out = np.empty_like(x)
    s = start
    c = 0.0
    for i in range(x.shape[0]):
        v = x[i]
        t = s + v
        if abs(s) >= abs(v):
            c += (s - t) + v
        else:
            c += (v - t) + s
        s = t
        out[i] = s + c
    return out


def _ccumsum_np(x: np.ndarray, start: float, block: int = 256) -> np.ndarray:
    out = np.empty_like(x)
    s = start
    c = 0.0
    for lo in range(0, x.shape[0], block):
        part = np.cumsum(x[lo:lo + block])
        base = s + c
        out[lo:lo + block] = base + part
        v = float(part[-1])
        t = s + v
        if abs(s) >= abs(v):
            c += (s - t) + v
        else:
            c += (v - t) + s
        s = t
    return out


def ccumsum(x, start: float = 0.0) -> np.ndarray:
    """Running compensated sum ``start + x[0] + ... + x[i]``."""
    x = np.ascontiguousarray(x, dtype=np.float64).ravel()
    if USE_NUMBA:
        return _ccumsum_nb(x, float(start))
    return _ccumsum_np(x, float(start))
