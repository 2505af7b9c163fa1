"""Divisor-function tables and the Dirichlet divisor error terms.

``d[n]`` holds the number of divisors of ``n``.  Prefix arrays are indexed the
same way, so ``D[k] = d[1] + ... + d[k]`` and ``D[0] = 0``.
"""
from __future__ import annotations

import math
import struct
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path

import numpy as np

from ._accel import USE_NUMBA, njit
from .compsum import ccumsum, csum
from .errors import CapacityError, DomainError, PersistenceError
from .fitting import fit_cubic_log

EULER_GAMMA_STR = "0.57721566490153286060651209008240243104215933593992"
EULER_GAMMA = float(EULER_GAMMA_STR)
EULER_GAMMA_LD = np.longdouble(EULER_GAMMA_STR)
# 2*gamma - 1, the constant of the divisor-problem main term
MAIN_C_LD = 2 * EULER_GAMMA_LD - 1

BYTES_PER_ENTRY = 4 + 8 + 8
DEFAULT_MEMORY_BUDGET = 2 * 1024**3

_MAGIC = b"ZMSDIV\x00\x00"
_VERSION = 1
_HEADER = struct.Struct("<8sIQ")


@njit
def _sieve_nb(limit):
    d = np.zeros(limit + 1, np.int32)
    r = 1
    while (r + 1) * (r + 1) <= limit:
        r += 1
    for i in range(1, r + 1):
        d[i * i] += 1
        for j in range(i * (i + 1), limit + 1, i):
            d[j] += 2
    return d


def _sieve_np(limit: int) -> np.ndarray:
    # each pair i < j with i*j = n contributes 2; squares contribute 1
    d = np.zeros(limit + 1, np.int32)
    for i in range(1, math.isqrt(limit) + 1):
        d[i * i] += 1
        d[i * (i + 1)::i] += 2
    return d


def sieve(limit: int) -> np.ndarray:
    return _sieve_nb(limit) if USE_NUMBA else _sieve_np(limit)


@dataclass(frozen=True, eq=False)
class DivisorTable:
    """Immutable table of d(n) with plain and alternating prefix sums."""

    limit: int
    d: np.ndarray
    D: np.ndarray = field(repr=False)
    A: np.ndarray = field(repr=False)

    @classmethod
    def from_counts(cls, d: np.ndarray) -> "DivisorTable":
        d = np.ascontiguousarray(d, dtype=np.int32)
        limit = d.shape[0] - 1
        sign = np.ones(limit + 1, np.int64)
        sign[1::2] = -1
        D = np.cumsum(d, dtype=np.int64)
        A = np.cumsum(sign * d, dtype=np.int64)
        for arr in (d, D, A):
            arr.setflags(write=False)
        return cls(limit, d, D, A)

    @cached_property
    def nD(self) -> np.ndarray:
        """Prefix sums of n*d(n)."""
        n = np.arange(self.limit + 1, dtype=np.int64)
        out = np.cumsum(n * self.d, dtype=np.int64)
        out.setflags(write=False)
        return out

    @cached_property
    def nA(self) -> np.ndarray:
        """Prefix sums of (-1)^n n d(n)."""
        n = np.arange(self.limit + 1, dtype=np.int64)
        n[1::2] *= -1
        out = np.cumsum(n * self.d, dtype=np.int64)
        out.setflags(write=False)
        return out

    def require(self, n, what: str = "argument") -> None:
        if np.max(n) > self.limit:
            raise CapacityError(
                f"divisor table limit {self.limit} too small for {what} {int(np.max(n))}")

    def save(self, path) -> None:
        """Write the flat binary form: header (magic, version, limit) then d[1..limit]."""
        try:
            with open(path, "wb") as fh:
                fh.write(_HEADER.pack(_MAGIC, _VERSION, self.limit))
                fh.write(self.d[1:].astype("<i4").tobytes())
        except OSError as exc:
            raise PersistenceError(f"cannot write divisor table {path}: {exc}") from exc

    @classmethod
    def load(cls, path) -> "DivisorTable":
        try:
            raw = Path(path).read_bytes()
        except OSError as exc:
            raise PersistenceError(f"cannot read divisor table {path}: {exc}") from exc
        if len(raw) < _HEADER.size:
            raise PersistenceError(f"{path}: truncated header")
        magic, version, limit = _HEADER.unpack_from(raw)
        if magic != _MAGIC or version != _VERSION:
            raise PersistenceError(f"{path}: not a divisor table (magic/version)")
        body = np.frombuffer(raw, dtype="<i4", offset=_HEADER.size)
        if body.shape[0] != limit:
            raise PersistenceError(f"{path}: expected {limit} entries, found {body.shape[0]}")
        d = np.zeros(limit + 1, np.int32)
        d[1:] = body
        return cls.from_counts(d)


def build_divisor_table(limit: int, memory_budget: int = DEFAULT_MEMORY_BUDGET) -> DivisorTable:
    """Sieve d(n) for 1 <= n <= limit and build both prefix arrays."""
    limit = int(limit)
    if limit < 1:
        raise CapacityError("divisor table limit must be >= 1")
    if (limit + 1) * BYTES_PER_ENTRY > memory_budget:
        raise CapacityError(
            f"limit {limit} needs {(limit + 1) * BYTES_PER_ENTRY} bytes, budget is {memory_budget}")
    return DivisorTable.from_counts(sieve(limit))


def _smooth(x):
    """x (log x + 2 gamma - 1) in extended precision; 0 at x = 0."""
    x = np.asarray(x, dtype=np.longdouble)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = x * (np.log(x) + MAIN_C_LD)
    return np.where(x > 0, out, np.longdouble(0))


def _floor_index(x) -> np.ndarray:
    return np.floor(np.asarray(x, dtype=np.float64)).astype(np.int64)


def _delta_raw(x, table: DivisorTable):
    # valid for any x >= 0; the divisor sum is empty below 1
    m = _floor_index(x)
    table.require(m, "floor(x)")
    return table.D[np.maximum(m, 0)].astype(np.longdouble) - _smooth(x)


def _out(v):
    v = np.asarray(v, dtype=np.float64)
    return float(v) if v.ndim == 0 else v


def delta(x, table: DivisorTable):
    """Dirichlet error term: sum_{n<=x} d(n) - x(log x + 2 gamma - 1)."""
    xa = np.asarray(x, dtype=np.float64)
    if np.any(xa < 1):
        raise DomainError("delta requires x >= 1")
    return _out(_delta_raw(xa, table))


def delta_star(x, table: DivisorTable, form: str = "alternating"):
    """Modified error term -Delta(x) + 2 Delta(2x) - Delta(4x)/2, in either algebraic form.

    ``form="alternating"`` evaluates ``(1/2) sum_{n<=4x} (-1)^n d(n) - x(log x + 2 gamma - 1)``.
    Both forms are defined for every x > 0; below x = 1/4 the divisor sums are empty.
    """
    xa = np.asarray(x, dtype=np.float64)
    if np.any(xa <= 0):
        raise DomainError("delta_star requires x > 0")
    if form == "combination":
        v = (-_delta_raw(xa, table) + 2 * _delta_raw(2 * xa, table)
             - _delta_raw(4 * xa, table) / 2)
    elif form == "alternating":
        m = _floor_index(4 * xa)
        table.require(m, "floor(4x)")
        v = table.A[m].astype(np.longdouble) / 2 - _smooth(xa)
    else:
        raise DomainError(f"unknown delta_star form {form!r}")
    return _out(v)


def delta_star_normalized(x, table: DivisorTable):
    """Mean of the one-sided limits of Delta* at x.

    Differs from :func:`delta_star` only where 4x is an integer, by half the
    jump (-1)^(4x) d(4x) / 2.  Oscillatory series for Delta* converge to this value.
    """
    xa = np.asarray(x, dtype=np.float64)
    v = np.asarray(delta_star(xa, table), dtype=np.float64)
    q = 4 * xa
    n = np.floor(q).astype(np.int64)
    on = (q == n) & (n >= 1)
    sgn = np.where(n % 2 == 0, 1.0, -1.0)
    return _out(v - np.where(on, sgn * table.d[np.where(on, n, 0)] / 4.0, 0.0))


def _smooth_integral(X):
    """Integral of x(log x + 2 gamma - 1) over [0, X]."""
    X = np.asarray(X, dtype=np.longdouble)
    with np.errstate(divide="ignore", invalid="ignore"):
        v = X * X / 2 * (np.log(X) + MAIN_C_LD) - X * X / 4
    return np.where(X > 0, v, np.longdouble(0))


def integral_delta_exact(X, table: DivisorTable):
    """Exact piecewise integral of delta over [0, X] (step part summed in closed form)."""
    Xa = np.asarray(X, dtype=np.float64)
    if np.any(Xa < 0):
        raise DomainError("integral upper limit must be >= 0")
    m = _floor_index(Xa)
    table.require(m, "floor(X)")
    X_ld = Xa.astype(np.longdouble)
    step = X_ld * table.D[m].astype(np.longdouble) - table.nD[m].astype(np.longdouble)
    return _out(step - _smooth_integral(X_ld))


def integral_delta_star_exact(X, table: DivisorTable):
    """Exact piecewise integral of delta_star over [0, X]."""
    Xa = np.asarray(X, dtype=np.float64)
    if np.any(Xa < 0):
        raise DomainError("integral upper limit must be >= 0")
    m = _floor_index(4 * Xa)
    table.require(m, "floor(4X)")
    X_ld = Xa.astype(np.longdouble)
    step = (X_ld * table.A[m].astype(np.longdouble) - table.nA[m].astype(np.longdouble) / 4) / 2
    return _out(step - _smooth_integral(X_ld))


@dataclass(frozen=True)
class WeightedSumResult:
    x: float
    a: float
    value: float
    coefficients: tuple | None = None
    residual_norm: float | None = None


def _d2_terms(table: DivisorTable, m: int, a: float) -> np.ndarray:
    n = np.arange(1, m + 1, dtype=np.float64)
    d2 = table.d[1:m + 1].astype(np.float64) ** 2
    return d2 if a == 0 else d2 * n ** a


def d_squared_weighted_sum(x: float, a: float, table: DivisorTable,
                           fit_grid=None) -> WeightedSumResult:
    """Sum of d(n)^2 n^a over n <= x, optionally with a cubic-in-log fit.

    When ``fit_grid`` is given, the sums at those x are fitted as
    ``x^(a+1) * (c0 + c1 log x + c2 log^2 x + c3 log^3 x)`` and the
    coefficients are returned low order first.
    """
    if a <= -0.5:
        raise DomainError("weighted divisor-square sums need a > -1/2")
    if x < 1:
        return WeightedSumResult(float(x), float(a), 0.0, None)
    m = int(math.floor(x))
    table.require(m, "floor(x)")
    coeffs = resid = None
    if fit_grid is None:
        value = csum(_d2_terms(table, m, a))
    else:
        grid = np.asarray(fit_grid, dtype=np.float64)
        top = max(m, int(np.floor(grid.max())))
        table.require(top, "fit grid")
        cum = weighted_d2_prefix(table, top, a)
        value = float(cum[m])
        fit = fit_cubic_log(grid, cum[np.floor(grid).astype(np.int64)], power=a + 1)
        coeffs, resid = tuple(float(c) for c in fit.coefficients), fit.residual_norm
    return WeightedSumResult(float(x), float(a), float(value), coeffs, resid)


def weighted_d2_prefix(table: DivisorTable, m: int, a: float) -> np.ndarray:
    """Array ``S`` with ``S[k] = sum_{n<=k} d(n)^2 n^a`` for 0 <= k <= m."""
    out = np.zeros(m + 1)
    if a == 0:
        out[1:] = np.cumsum(table.d[1:m + 1].astype(np.int64) ** 2)
    else:
        out[1:] = ccumsum(_d2_terms(table, m, a))
    return out
