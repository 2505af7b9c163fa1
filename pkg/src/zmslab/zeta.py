"""Critical-line evaluation of zeta(1/2 + it).

Riemann-Siegel with corrections C0..C4 for t >= ``RS_THRESHOLD``,
Euler-Maclaurin summation below it.  Both paths also return a per-point
absolute error bound.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from ._accel import USE_NUMBA, as_f64, chunked_map, njit
from ._rs_coeffs import RS_COEFFS
from .errors import CapacityError, DomainError

RS_THRESHOLD = 30.0
RS_TERMS = len(RS_COEFFS)
# empirical sup of |Z_RS - Z| * t^(11/4) is 0.0122 on [25, 1e3]; Gabcke's bound is 0.017
RS_ERR_CONST = 0.017
EM_ABS_ERR = 1e-12
DEFAULT_T_MAX = 1e7
NODE_CHUNK = 1 << 15

TWO_PI = 2.0 * math.pi
_EPS = np.finfo(np.float64).eps

_MAXDEG = max(len(c) for c in RS_COEFFS)
_RS_TABLE = np.zeros((RS_TERMS, _MAXDEG))
for _k, _c in enumerate(RS_COEFFS):
    _RS_TABLE[_k, : len(_c)] = _c


def _bernoulli_even(count: int) -> list[Fraction]:
    B = [Fraction(1)]
    for m in range(1, 2 * count + 1):
        B.append(-sum(math.comb(m + 1, j) * B[j] for j in range(m)) / (m + 1))
    return [B[2 * k] for k in range(1, count + 1)]


_EM_K = 18
# B_{2k} / (2k)!
_EM_COEF = np.array([float(b / math.factorial(2 * k))
                     for k, b in enumerate(_bernoulli_even(_EM_K), start=1)])


@dataclass(frozen=True)
class ZetaPoint:
    t: float
    value: complex
    method: str
    err_est: float


def theta(t):
    """Riemann-Siegel theta via its Stirling series (accurate to 1e-13 for t >= 10)."""
    t = np.asarray(t, dtype=np.float64)
    it = 1.0 / t
    it2 = it * it
    corr = it * (1 / 48 + it2 * (7 / 5760 + it2 * (31 / 80640 + it2 * (127 / 430080))))
    return 0.5 * t * np.log(t / TWO_PI) - 0.5 * t - math.pi / 8 + corr


@njit(nogil=True)
def _rs_z_nb(t, coef, out, err, lo, hi):
    nterms = coef.shape[0]
    deg = coef.shape[1]
    for i in range(lo, hi):
        ti = t[i]
        a = math.sqrt(ti / (2.0 * math.pi))
        N = int(a)
        u = (a - N) - 0.5
        it = 1.0 / ti
        it2 = it * it
        th = (0.5 * ti * math.log(ti / (2.0 * math.pi)) - 0.5 * ti - math.pi / 8.0
              + it * (1.0 / 48.0 + it2 * (7.0 / 5760.0 + it2 * (31.0 / 80640.0
                                                              + it2 * (127.0 / 430080.0)))))
        s = 0.0
        for n in range(1, N + 1):
            s += math.cos(th - ti * math.log(n)) / math.sqrt(n)
        s *= 2.0
        r = 0.0
        w = 1.0
        for k in range(nterms):
            v = 0.0
            for j in range(deg - 1, -1, -1):
                v = v * u + coef[k, j]
            r += v * w
            w /= a
        sign = 1.0 if (N - 1) % 2 == 0 else -1.0
        out[i] = s + sign * r / math.sqrt(a)
        err[i] = 0.017 * ti ** -2.75 + 4.0 * 2.220446049250313e-16 * (abs(th) + 1.0) * math.sqrt(N + 1.0)


def _rs_z_np(t, coef, out, err, lo, hi):
    ti = t[lo:hi]
    a = np.sqrt(ti / TWO_PI)
    N = a.astype(np.int64)
    u = (a - N) - 0.5
    th = theta(ti)
    s = np.zeros_like(ti)
    for n in range(1, int(N.max(initial=0)) + 1):
        m = N >= n
        s[m] += np.cos(th[m] - ti[m] * math.log(n)) / math.sqrt(n)
    s *= 2.0
    r = np.zeros_like(ti)
    w = np.ones_like(ti)
    for k in range(coef.shape[0]):
        v = np.zeros_like(ti)
        for j in range(coef.shape[1] - 1, -1, -1):
            v = v * u + coef[k, j]
        r += v * w
        w = w / a
    sign = np.where((N - 1) % 2 == 0, 1.0, -1.0)
    out[lo:hi] = s + sign * r / np.sqrt(a)
    err[lo:hi] = RS_ERR_CONST * ti ** -2.75 + 4 * _EPS * (np.abs(th) + 1.0) * np.sqrt(N + 1.0)


def riemann_siegel_z(t, with_error: bool = False):
    """Hardy's Z(t) for t >= 2 pi by the Riemann-Siegel formula."""
    t = as_f64(np.atleast_1d(t))
    if np.any(t < TWO_PI):
        raise DomainError("Riemann-Siegel needs t >= 2 pi")
    out = np.empty_like(t)
    err = np.empty_like(t)
    kern = _rs_z_nb if USE_NUMBA else _rs_z_np
    chunked_map(lambda lo, hi: kern(t, _RS_TABLE, out, err, lo, hi), t.shape[0], NODE_CHUNK)
    return (out, err) if with_error else out


def euler_maclaurin_zeta(s, n_terms: int | None = None):
    """zeta(s) for complex s (Re s > -1, |Im s| moderate) by Euler-Maclaurin.

    Returns ``(value, err_est)`` arrays.
    """
    s = np.atleast_1d(np.asarray(s, dtype=np.complex128))
    if n_terms is None:
        # fixed below |s| = 40 so node values never depend on how nodes are batched
        smax = np.abs(s).max(initial=0.0)
        n_terms = 60 if smax <= 40 else int(math.ceil(smax)) + 20
    N = n_terms
    n = np.arange(1, N, dtype=np.float64)
    logn = np.log(n)
    head = np.exp(-np.outer(s, logn)).sum(axis=1)
    logN = math.log(N)
    NmS = np.exp(-s * logN)
    val = head + N * NmS / (s - 1) + 0.5 * NmS
    poch = s.copy()
    powN = NmS / N
    last = np.zeros(s.shape)
    for k in range(_EM_K):
        term = _EM_COEF[k] * poch * powN
        val = val + term
        last = np.abs(term)
        poch = poch * (s + 2 * k + 1) * (s + 2 * k + 2)
        powN = powN / (N * N)
    err = 10 * last + EM_ABS_ERR
    return val, err


def zeta_half(t: float, t_max: float = DEFAULT_T_MAX, method: str | None = None) -> ZetaPoint:
    """zeta(1/2 + it) with a heuristic absolute error bound.

    Negative t is served by conjugate symmetry.  ``method`` forces
    ``"euler_maclaurin"`` or ``"riemann_siegel"``; by default the split is at
    t = 30.
    """
    t = float(t)
    if abs(t) > t_max:
        raise CapacityError(f"|t| = {abs(t)} exceeds t_max = {t_max}")
    if t < 0:
        p = zeta_half(-t, t_max, method)
        return ZetaPoint(t, p.value.conjugate(), p.method, p.err_est)
    if method is None:
        method = "riemann_siegel" if t >= RS_THRESHOLD else "euler_maclaurin"
    if method == "euler_maclaurin":
        v, e = euler_maclaurin_zeta(0.5 + 1j * t)
        return ZetaPoint(t, complex(v[0]), method, float(e[0]))
    if method == "riemann_siegel":
        z, e = riemann_siegel_z(t, with_error=True)
        th = float(theta(t))
        err = float(e[0]) + abs(float(z[0])) * 1e-13
        return ZetaPoint(t, complex(z[0] * np.exp(-1j * th)), method, err)
    raise DomainError(f"unknown zeta method {method!r}")


def zeta_abs2(t):
    """|zeta(1/2 + it)|^2 and a per-node absolute error bound, for t >= 0 arrays."""
    t = as_f64(np.atleast_1d(t))
    g = np.empty_like(t)
    err = np.empty_like(t)
    hi = t >= RS_THRESHOLD
    if hi.any():
        z, ze = riemann_siegel_z(t[hi], with_error=True)
        g[hi] = z * z
        err[hi] = 2 * np.abs(z) * ze + ze * ze
    lo = ~hi
    if lo.any():
        v, ve = euler_maclaurin_zeta(0.5 + 1j * t[lo])
        g[lo] = v.real ** 2 + v.imag ** 2
        err[lo] = 2 * np.abs(v) * ve + ve * ve
    return g, err
