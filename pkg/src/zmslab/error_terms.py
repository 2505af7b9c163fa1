"""E(T), E*(t) and R(T) by quadrature, and R(T) by the explicit formula."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .divisor import MAIN_C_LD, DivisorTable, delta_star
from .errors import DomainError, PrecisionError
from .explicit import R_explicit
from .quadrature import QuadratureCheckpointStore, eps_quad, estar_integral, mean_square_integral

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class ErrorTermSample:
    t: float
    E: float
    delta_star_scaled: float
    E_star: float
    R: float | None
    method: str
    err_est: float

    FIELDS = ("t", "E", "delta_star_scaled", "E_star", "R", "method", "err_est")

    def row(self) -> tuple:
        return tuple(getattr(self, f) for f in self.FIELDS)


def main_term(T):
    """T (log(T/2pi) + 2 gamma - 1) in extended precision."""
    T = np.longdouble(T)
    return T * (np.log(T / np.longdouble(TWO_PI)) + MAIN_C_LD)


def E_quad(T: float, store: QuadratureCheckpointStore, with_error: bool = False):
    """Mean-square error term int_0^T |zeta|^2 - T (log(T/2pi) + 2 gamma - 1)."""
    if T < 0:
        raise DomainError("E_quad needs T >= 0")
    if T == 0:
        return (0.0, 0.0) if with_error else 0.0
    M, _, err = store.state_at(T)
    if err > eps_quad(T):
        raise PrecisionError(f"quadrature error {err:.3g} above target", achieved=err)
    v = float(np.longdouble(M) - main_term(T))
    return (v, err) if with_error else v


def E_star(t: float, store: QuadratureCheckpointStore, table: DivisorTable,
           with_R: bool = False) -> ErrorTermSample:
    """E*(t) = E(t) - 2 pi Delta*(t / 2pi), with Delta* from the exact divisor sums."""
    if t < TWO_PI:
        raise DomainError("E_star needs t >= 2 pi")
    E, err = E_quad(t, store, with_error=True)
    dss = TWO_PI * delta_star(t / TWO_PI, table)
    R = None
    if with_R:
        R = R_quad(t, store, table)
    return ErrorTermSample(t, E, dss, E - dss, R, "quadrature", err)


def R_quad(T: float, store: QuadratureCheckpointStore, table: DivisorTable,
           with_error: bool = False):
    """R(T) = int_0^T E*(t) dt - 3 pi T / 4 from the checkpointed pass."""
    if T < TWO_PI:
        raise DomainError("R_quad needs T >= 2 pi")
    M, U, err = store.state_at(T)
    I = float(estar_integral(T, M, U, table))
    v = I - 0.75 * math.pi * T
    # T dM - dU = int_0^T (T - u) dg(u), so |.| <= T int |dg|
    r_err = T * err
    return (v, r_err) if with_error else v


def R_sample(T: float, store: QuadratureCheckpointStore, table: DivisorTable,
             method: str = "quadrature") -> ErrorTermSample:
    """Sample record carrying R(T) by either path."""
    s = E_star(T, store, table)
    if method == "quadrature":
        R, err = R_quad(T, store, table, with_error=True)
    elif method == "explicit":
        res = R_explicit(T, table)
        R, err = res.value, 5 * T ** 0.25 + res.tail_est
    else:
        raise DomainError(f"unknown method {method!r}")
    return ErrorTermSample(T, s.E, s.delta_star_scaled, s.E_star, R, method, err)


def integral_E_quad(T: float, store: QuadratureCheckpointStore, with_error: bool = False):
    """int_0^T E(t) dt = T M(T) - int_0^T u |zeta|^2 du - int_0^T main_term."""
    M, U, err = store.state_at(T)
    TL = np.longdouble(T)
    smooth = TL * TL / 2 * (np.log(TL / np.longdouble(TWO_PI)) + MAIN_C_LD) - TL * TL / 4
    v = float(TL * np.longdouble(M) - np.longdouble(U) - smooth)
    return (v, T * err) if with_error else v


__all__ = ["ErrorTermSample", "E_quad", "E_star", "R_quad", "R_explicit", "R_sample",
           "integral_E_quad", "mean_square_integral", "main_term"]
