"""Truncated explicit formulas for E(T), Delta*(x) and their integrals.

All sums run over ascending n in fixed chunks and are reduced with
compensated summation, so results are deterministic.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .compsum import csum
from .divisor import EULER_GAMMA, DivisorTable
from .errors import DomainError

PI = math.pi
TWO_PI = 2.0 * PI
C0 = 1.0 / TWO_PI + 0.5 - math.sqrt(0.25 + 1.0 / TWO_PI)
SERIES_CHUNK = 1 << 20
SIGMA2_GUARD = 0.999


@dataclass(frozen=True)
class SeriesParams:
    """Truncation lengths for the Atkinson-type sums."""

    N: float
    N_prime: float
    kind: str = "atkinson"


def n_prime(T: float, N: float) -> float:
    return T / TWO_PI + N / 2 - math.sqrt(N * N / 4 + N * T / TWO_PI)


def atkinson_params(T: float, N: float | None = None, A: float = 0.5,
                    A_prime: float = 2.0) -> SeriesParams:
    """Parameters for Atkinson's formula; N defaults to T and must satisfy A T < N < A' T."""
    N = float(T) if N is None else float(N)
    if not (0 < A < A_prime) or not (A * T < N < A_prime * T):
        raise DomainError(f"need {A}*T < N < {A_prime}*T, got N={N}, T={T}")
    return SeriesParams(N, n_prime(T, N), "atkinson")


@dataclass(frozen=True)
class TruncatedSeries:
    """A truncated series value with a heuristic bound on the dropped tail."""

    value: float
    tail_est: float
    n_max: int
    truncated: bool

    def __float__(self) -> float:
        return self.value


def _alt(n: np.ndarray) -> np.ndarray:
    return np.where(n % 2 == 0, 1.0, -1.0)


def _series(table: DivisorTable, n_lo: int, n_hi: int, term) -> float:
    """Compensated sum of ``term(n, d(n))`` over n_lo <= n <= n_hi, in chunks."""
    if n_hi < n_lo:
        return 0.0
    table.require(n_hi, "series length")
    parts = []
    for lo in range(n_lo, n_hi + 1, SERIES_CHUNK):
        hi = min(n_hi, lo + SERIES_CHUNK - 1)
        n = np.arange(lo, hi + 1, dtype=np.float64)
        d = table.d[lo:hi + 1].astype(np.float64)
        parts.append(csum(term(n, d)))
    return csum(np.asarray(parts))


# phase and amplitudes -------------------------------------------------

def _z(t, n):
    return PI * np.asarray(n, dtype=np.float64) / (2.0 * t)


def _phase(t, n):
    n = np.asarray(n, dtype=np.float64)
    return (2.0 * t * np.arcsinh(np.sqrt(_z(t, n)))
            + np.sqrt(TWO_PI * n * t + PI * PI * n * n) - PI / 4)


def phase_f(t: float, n):
    """f(t, n) = 2t arsinh(sqrt(pi n / 2t)) + sqrt(2 pi n t + pi^2 n^2) - pi/4, for 1 <= n < t."""
    na = np.asarray(n, dtype=np.float64)
    if np.any(na < 1) or np.any(na >= t):
        raise DomainError("phase_f needs 1 <= n < t")
    v = _phase(t, na)
    return float(v) if v.ndim == 0 else v


def _phase_series_coeffs(order: int) -> list[float]:
    # arsinh(y)/y + sqrt(1 + y^2) as a series in z = y^2
    out = []
    for k in range(order + 1):
        a = (-1) ** k * math.factorial(2 * k) / (4 ** k * math.factorial(k) ** 2 * (2 * k + 1))
        b = math.prod(0.5 - j for j in range(k)) / math.factorial(k)
        out.append(a + b)
    return out


def phase_f_series(t: float, n, order: int = 3):
    """Asymptotic form -pi/4 + 2 sqrt(2 pi n t) + a3 n^1.5 t^-0.5 + a5 n^2.5 t^-1.5 + ...

    ``order`` counts correction terms after the leading one (3 keeps a3, a5, a7).
    Coefficients are Taylor coefficients of the closed form in pi n / 2t.
    """
    z = _z(t, n)
    coef = _phase_series_coeffs(order)
    acc = np.zeros_like(z)
    for c in reversed(coef):
        acc = acc * z + c
    v = 2.0 * t * np.sqrt(z) * acc - PI / 4
    return float(v) if np.ndim(v) == 0 else v


def arsinh(x):
    """log(x + sqrt(1 + x^2)), accurate for small x as well."""
    return np.arcsinh(np.asarray(x, dtype=np.float64))


def _bracket(t, n):
    # (2t / pi n)^(1/2) arsinh(sqrt(pi n / 2t))
    y = np.sqrt(_z(t, n))
    return np.arcsinh(y) / y


def _amp_e(t, n):
    return (1.0 + _z(t, n)) ** -0.25 / _bracket(t, n)


def _amp_e2(t, n, form: str = "printed"):
    n = np.asarray(n, dtype=np.float64)
    if form == "printed":
        return (1.0 + PI * n / t) ** -0.25 * _bracket(t, n) ** -0.5
    if form == "derived":
        # the amplitude obtained by integrating the Atkinson term once in t
        return (1.0 + _z(t, n)) ** -0.25 * _bracket(t, n) ** -2
    raise DomainError(f"unknown e2 form {form!r}")


def _check_amp(t, n):
    na = np.asarray(n, dtype=np.float64)
    if np.any(na < 1) or np.any(na > t):
        raise DomainError("amplitudes need 1 <= n <= t")
    return na


def amplitude_e(t: float, n):
    """e(t, n) = (1 + pi n / 2t)^(-1/4) {(2t/pi n)^(1/2) arsinh(sqrt(pi n / 2t))}^(-1)."""
    v = _amp_e(t, _check_amp(t, n))
    return float(v) if v.ndim == 0 else v


def amplitude_e2(t: float, n, form: str = "printed"):
    """e2(t, n) = (1 + pi n / t)^(-1/4) {(2t/pi n)^(1/2) arsinh((pi n / 2t)^(1/2))}^(-1/2).

    ``form="derived"`` gives (1 + pi n/2t)^(-1/4) {...}^(-2) instead.
    """
    v = _amp_e2(t, _check_amp(t, n), form)
    return float(v) if v.ndim == 0 else v


# Atkinson's formula ---------------------------------------------------

def _sigma2_guard(T: float, n_max: int) -> None:
    if n_max > SIGMA2_GUARD * T / TWO_PI:
        raise AssertionError(f"log(T/2 pi n) too close to 0: n = {n_max}, T = {T}")


def atkinson_sigma1(T: float, N: float, table: DivisorTable, flip_signs: bool = False) -> float:
    sgn = (lambda n: np.ones_like(n)) if flip_signs else _alt

    def term(n, d):
        return sgn(n) * d * n ** -0.75 * _amp_e(T, n) * np.cos(_phase(T, n))

    return math.sqrt(2.0) * (T / TWO_PI) ** 0.25 * _series(table, 1, int(math.floor(N)), term)


def atkinson_sigma2(T: float, N_prime: float, table: DivisorTable) -> float:
    n_max = int(math.floor(N_prime))
    if n_max < 1:
        return 0.0
    _sigma2_guard(T, n_max)

    def term(n, d):
        L = np.log(T / (TWO_PI * n))
        return d / (np.sqrt(n) * L) * np.cos(T * L - T + PI / 4)

    return -2.0 * _series(table, 1, n_max, term)


def atkinson_E(T: float, params: SeriesParams | None, table: DivisorTable,
               flip_signs: bool = False) -> float:
    """Sigma_1(T) + Sigma_2(T) of Atkinson's formula (defect O(log^2 T) not included)."""
    if T < 50:
        raise DomainError("atkinson_E needs T >= 50")
    if params is None:
        params = atkinson_params(T)
    table.require(int(max(params.N, params.N_prime)), "truncation")
    return (atkinson_sigma1(T, params.N, table, flip_signs)
            + atkinson_sigma2(T, params.N_prime, table))


# Voronoi-type formulas ------------------------------------------------

def voronoi_delta_star(x: float, N: float, table: DivisorTable) -> float:
    """(1/(pi sqrt 2)) x^(1/4) sum_{n<=N} (-1)^n d(n) n^(-3/4) cos(4 pi sqrt(n x) - pi/4)."""
    if x < 1:
        raise DomainError("voronoi_delta_star needs x >= 1")

    def term(n, d):
        return _alt(n) * d * n ** -0.75 * np.cos(4 * PI * np.sqrt(n * x) - PI / 4)

    s = _series(table, 1, int(math.floor(N)), term)
    return x ** 0.25 / (PI * math.sqrt(2.0)) * s


def voronoi_delta(x: float, N: float, table: DivisorTable) -> float:
    """Classical truncated Voronoi series for Delta(x) (plus its constant 1/4)."""

    def term(n, d):
        return d * n ** -0.75 * np.cos(4 * PI * np.sqrt(n * x) - PI / 4)

    return 0.25 + x ** 0.25 / (PI * math.sqrt(2.0)) * _series(table, 1, int(math.floor(N)), term)


def _tail_5_4(M: int) -> float:
    # heuristic size of sum_{n > M} (+-1)^n d(n) n^(-5/4) sin(phase): the phase
    # oscillation leaves roughly log M / sqrt(M); observed tails sit ~10x below this
    if M < 1:
        return math.inf
    return 2.0 * (math.log(M) + 2 * EULER_GAMMA) / math.sqrt(M)


def integral_delta(X: float, M: float, table: DivisorTable) -> TruncatedSeries:
    """X/4 + X^(3/4)/(2 sqrt 2 pi^2) sum_{n<=M} d(n) n^(-5/4) sin(4 pi sqrt(nX) - pi/4)."""
    if X < 1:
        raise DomainError("integral_delta needs X >= 1")
    m = int(math.floor(M))

    def term(n, d):
        return d * n ** -1.25 * np.sin(4 * PI * np.sqrt(n * X) - PI / 4)

    pref = X ** 0.75 / (2 * math.sqrt(2.0) * PI ** 2)
    s = _series(table, 1, m, term)
    tail = pref * _tail_5_4(m) if m >= 1 else pref * math.inf
    return TruncatedSeries(X / 4 + pref * s, tail, max(m, 0), True)


def integral_delta_star(T: float, table: DivisorTable, n_max: int | None = None) -> TruncatedSeries:
    """T/8 + T^(3/4)/(2 sqrt 2 pi^2) sum_{n<=T^2} (-1)^n d(n) n^(-5/4) sin(4 pi sqrt(nT) - pi/4).

    The sum is cut at min(T^2, table limit, n_max); ``tail_est`` bounds the rest.
    """
    if T < 1:
        raise DomainError("integral_delta_star needs T >= 1")
    full = int(math.floor(T * T))
    m = min(full, table.limit if n_max is None else int(n_max))

    def term(n, d):
        return _alt(n) * d * n ** -1.25 * np.sin(4 * PI * np.sqrt(n * T) - PI / 4)

    pref = T ** 0.75 / (2 * math.sqrt(2.0) * PI ** 2)
    s = _series(table, 1, m, term)
    truncated = m < full
    tail = pref * _tail_5_4(m) if truncated else 0.0
    if m < 1:
        tail = pref * math.inf
    return TruncatedSeries(T / 8 + pref * s, tail, m, truncated)


def _log_weighted_sum(T: float, n_max: int, table: DivisorTable) -> float:
    # -2 sum d(n) n^(-1/2) (log T/2 pi n)^(-2) sin(T log(T/2 pi n) - T + pi/4)
    if n_max < 1:
        return 0.0
    _sigma2_guard(T, n_max)

    def term(n, d):
        L = np.log(T / (TWO_PI * n))
        return d / (np.sqrt(n) * L * L) * np.sin(T * L - T + PI / 4)

    return -2.0 * _series(table, 1, n_max, term)


def integral_E(T: float, table: DivisorTable, e2_form: str = "printed") -> float:
    """pi T plus the two explicit sums of the Hafner-Ivic formula for int_0^T E."""
    if T < 50:
        raise DomainError("integral_E needs T >= 50")
    nT = int(math.floor(T))
    table.require(nT, "T")

    def term(n, d):
        return _alt(n) * d * n ** -1.25 * _amp_e2(T, n, e2_form) * np.sin(_phase(T, n))

    pref = 0.5 * (2 * T / PI) ** 0.75
    return PI * T + pref * _series(table, 1, nT, term) + _log_weighted_sum(
        T, int(math.floor(C0 * T)), table)


def R_explicit(T: float, table: DivisorTable, n_max: int | None = None,
               e2_form: str = "printed") -> TruncatedSeries:
    """R(T) from the combined integral formulas (defect O(T^(1/4)) not included)."""
    if T < 50:
        raise DomainError("R_explicit needs T >= 50")
    nT = int(math.floor(T))
    full = int(math.floor(T * T))
    m = min(full, table.limit if n_max is None else int(n_max))
    table.require(nT, "T")
    pref = 0.5 * (2 * T / PI) ** 0.75

    def head(n, d):
        s0 = np.sin(2 * np.sqrt(TWO_PI * n * T) - PI / 4)
        return _alt(n) * d * n ** -1.25 * (_amp_e2(T, n, e2_form) * np.sin(_phase(T, n)) - s0)

    def tail(n, d):
        return -_alt(n) * d * n ** -1.25 * np.sin(2 * np.sqrt(TWO_PI * n * T) - PI / 4)

    s = _series(table, 1, nT, head) + _series(table, nT + 1, m, tail)
    value = pref * s + _log_weighted_sum(T, int(math.floor(C0 * T)), table)
    truncated = m < full
    return TruncatedSeries(value, pref * _tail_5_4(m) if truncated else 0.0, m, truncated)
