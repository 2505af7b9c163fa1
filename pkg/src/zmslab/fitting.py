"""Least-squares fits of T^power * cubic(log T)."""
from __future__ import annotations

from dataclasses import dataclass
from math import comb

import numpy as np

from .errors import FitError

MIN_POINTS = 8
MIN_DECADES = 1.5


@dataclass(frozen=True)
class CubicFit:
    """``moment ~ T^power * (c0 + c1 L + c2 L^2 + c3 L^3)`` with L = log T."""

    coefficients: tuple
    residual_norm: float
    power: float
    grid: tuple

    @property
    def leading(self) -> float:
        return self.coefficients[3]

    def __call__(self, T):
        L = np.log(np.asarray(T, dtype=np.float64))
        c0, c1, c2, c3 = self.coefficients
        return np.asarray(T, dtype=np.float64) ** self.power * (c0 + L * (c1 + L * (c2 + L * c3)))


def fit_cubic_log(T, moment, power: float) -> CubicFit:
    """Fit ``moment / T^power`` by a cubic in log T.

    The design uses log T centered at its mean; coefficients are mapped back to
    powers of the uncentered log T before returning.
    """
    T = np.asarray(T, dtype=np.float64).ravel()
    y = np.asarray(moment, dtype=np.float64).ravel()
    if T.shape != y.shape:
        raise FitError("T and moment series differ in length")
    if T.size < MIN_POINTS:
        raise FitError(f"need at least {MIN_POINTS} sample points, got {T.size}")
    if np.any(T <= 0):
        raise FitError("sample abscissae must be positive")
    span = np.log10(T.max() / T.min())
    if span < MIN_DECADES:
        raise FitError(f"sample grid spans {span:.2f} decades, need {MIN_DECADES}")
    L = np.log(T)
    mu = L.mean()
    s = L - mu
    V = np.vander(s, 4, increasing=True)
    rhs = y / T ** power
    b, _, rank, sv = np.linalg.lstsq(V, rhs, rcond=None)
    if rank < 4 or sv[-1] <= 1e-12 * sv[0]:
        raise FitError("rank-deficient cubic-log design")
    resid = float(np.linalg.norm(V @ b - rhs))
    # sum_k b_k (L - mu)^k  ->  sum_j c_j L^j
    c = np.zeros(4)
    for k in range(4):
        for j in range(k + 1):
            c[j] += b[k] * comb(k, j) * (-mu) ** (k - j)
    return CubicFit(tuple(float(v) for v in c), resid, float(power), tuple(T.tolist()))
