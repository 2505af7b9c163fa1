"""Windowed moments, growth-law ratios, cubic-in-log fits and large-value scans."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .compsum import csum
from .divisor import DivisorTable, _smooth, delta, delta_star
from .errors import ConfigError
from .fitting import CubicFit, fit_cubic_log
from .quadrature import GL_W, GL_X, QuadratureCheckpointStore

TARGETS = ("E_star", "R", "E", "delta", "delta_star")
SUPPORTED_K = (1, 2, 4, 5)
MIN_T = 50.0
# longest stretch marched in one piece; bounds node memory, not results
WINDOW_PIECE = 1024.0


def _norm_target(target):
    if callable(target):
        return target
    name = str(target).replace("-", "_")
    if name not in TARGETS:
        raise ConfigError(f"unknown target {target!r}")
    return name


def default_H(T: float) -> float:
    return T ** 0.7


@dataclass(frozen=True)
class MomentReport:
    target: str
    T: float
    H: float
    k: int
    moment: float
    scale: float
    ratio: float

    FIELDS = ("target", "T", "H", "k", "moment", "scale", "ratio")

    def row(self) -> tuple:
        return tuple(getattr(self, f) for f in self.FIELDS)


def moment_scale(target: str, T: float, H: float, k: int) -> float:
    L3 = math.log(T) ** 3
    if target == "E_star" and k == 2:
        return H * T ** (1 / 3) * L3
    if target == "R" and k == 2:
        return H * T * L3
    if target == "E_star" and k == 5:
        return T * T
    if target == "R" and k == 4:
        return T ** 3
    return 1.0


def _pieces(T0: float, T1: float, piece: float = WINDOW_PIECE):
    n = max(1, math.ceil((T1 - T0) / piece))
    edges = [T0 + (T1 - T0) * j / n for j in range(n)] + [T1]
    return list(zip(edges[:-1], edges[1:]))


def iter_march(store: QuadratureCheckpointStore, T0: float, T1: float):
    """Node-level marches covering [T0, T1] in bounded pieces."""
    for a, b in _pieces(T0, T1):
        yield store.march_window(a, b, split_steps=True)


def _field(r, target: str) -> np.ndarray:
    return {"E_star": r.E_star, "R": r.R, "E": r.E}[target]


def _divisor_nodes(target: str, T0: float, T1: float, h: float):
    # f is smooth between jumps at integers (delta) or quarter-integers (delta_star)
    q = 1.0 if target == "delta" else 0.25
    brk = np.arange(math.floor(T0 / q) + 1, math.ceil(T1 / q)) * q
    brk = np.concatenate(([T0], brk[(brk > T0) & (brk < T1)], [T1]))
    edges = [brk[:1]]
    for a, b in zip(brk[:-1], brk[1:]):
        k = max(1, math.ceil((b - a) / h * (1 - 1e-12)))
        e = a + (b - a) * np.arange(1, k + 1) / k
        e[-1] = b
        edges.append(e)
    e = np.concatenate(edges)
    hw = 0.5 * np.diff(e)
    t = e[:-1, None] + hw[:, None] * (1.0 + GL_X[None, :])
    return t, hw[:, None] * GL_W[None, :]


def _divisor_eval(target: str, t, table: DivisorTable):
    return delta(t, table) if target == "delta" else delta_star(t, table)


def _synthetic_nodes(T0: float, T1: float, h: float):
    n = max(1, math.ceil((T1 - T0) / h))
    e = T0 + (T1 - T0) * np.arange(n + 1) / n
    hw = 0.5 * np.diff(e)
    t = e[:-1, None] + hw[:, None] * (1.0 + GL_X[None, :])
    return t, hw[:, None] * GL_W[None, :]


def window_integral(target, T0: float, T1: float, k: int, store: QuadratureCheckpointStore,
                    table: DivisorTable | None = None) -> float:
    """int_{T0}^{T1} f^k by composite Gauss-Legendre on the store's grid."""
    target = _norm_target(target)
    table = store.table if table is None else table
    if callable(target):
        t, w = _synthetic_nodes(T0, T1, store.h)
        f = np.broadcast_to(np.asarray(target(t), dtype=np.float64), t.shape)
        return csum((w * f ** k).ravel())
    if target in ("delta", "delta_star"):
        parts = []
        for a, b in _pieces(T0, T1):
            t, w = _divisor_nodes(target, a, b, store.h)
            parts.append(csum((w * _divisor_eval(target, t, table) ** k).ravel()))
        return math.fsum(parts)
    parts = [csum((r.wt * _field(r, target) ** k).ravel()) for r in iter_march(store, T0, T1)]
    return math.fsum(parts)


def window_moment(target, T: float, H: float, k: int, store: QuadratureCheckpointStore,
                  table: DivisorTable | None = None) -> MomentReport:
    """int_T^{T+H} f^k with its comparator scale and ratio.

    ``target`` is one of ``TARGETS`` or a vectorized callable (a synthetic test
    integrand, reported with scale 1).
    """
    target = _norm_target(target)
    if k not in SUPPORTED_K:
        raise ConfigError(f"moment order k={k} not supported (use one of {SUPPORTED_K})")
    if not callable(target) and T < MIN_T:
        raise ConfigError(f"window moments need T >= {MIN_T}")
    if not (0 < H <= T):
        raise ConfigError("window length must satisfy 0 < H <= T")
    moment = window_integral(target, T, T + H, k, store, table)
    name = "synthetic" if callable(target) else target
    scale = moment_scale(name, T, H, k)
    return MomentReport(name, float(T), float(H), int(k), moment, scale, moment / scale)


def theorem_ratio_sweep(target, k: int, T_list, store: QuadratureCheckpointStore,
                        table: DivisorTable | None = None, H_rule=default_H) -> list[MomentReport]:
    """window_moment at each T with H = H_rule(T)."""
    return [window_moment(target, T, H_rule(T), k, store, table) for T in T_list]


def ratio_spread(reports) -> float:
    r = np.array([abs(x.ratio) for x in reports])
    if np.any(r == 0):
        return math.inf
    return float(r.max() / r.min())


def global_moment_series(target, T_list, store: QuadratureCheckpointStore,
                         table: DivisorTable | None = None, k: int = 2) -> np.ndarray:
    """int_0^T f^k at each T of an increasing list, by one chained march."""
    target = _norm_target(target)
    T_list = np.asarray(T_list, dtype=np.float64)
    if np.any(np.diff(T_list) <= 0) or T_list[0] <= 0:
        raise ConfigError("sample points must be positive and increasing")
    out = np.empty_like(T_list)
    parts = []
    prev = 0.0
    for j, T in enumerate(T_list):
        parts.append(window_integral(target, prev, float(T), k, store, table))
        out[j] = math.fsum(parts)
        prev = float(T)
    return out


def fit_global_moment(target, T_list, power: float, store: QuadratureCheckpointStore,
                      table: DivisorTable | None = None) -> CubicFit:
    """Cubic-in-log fit of int_0^T f^2 against T^power."""
    return fit_cubic_log(T_list, global_moment_series(target, T_list, store, table), power)


def comparator(target: str, t):
    t = np.asarray(t, dtype=np.float64)
    if target == "E_star":
        return t ** (1 / 6) * np.log(t) ** 1.5
    if target == "R":
        return np.sqrt(t) * np.log(t) ** 1.5
    return np.sqrt(t)


@dataclass(frozen=True)
class OmegaScan:
    """Extremes of f over a window, relative to the comparator."""

    target: str
    T: float
    H: float
    t_max: float
    f_max: float
    t_min: float
    f_min: float
    ratio_pos: float
    ratio_neg: float
    ratio_abs: float
    exceeds_A: bool
    exceeds_B: bool
    both_signs: bool
    D: float

    FIELDS = ("target", "T", "H", "t_max", "f_max", "t_min", "f_min", "ratio_pos",
              "ratio_neg", "ratio_abs", "exceeds_A", "exceeds_B", "both_signs", "D")

    def row(self) -> tuple:
        return tuple(getattr(self, f) for f in self.FIELDS)


def _delta_extremes(T0: float, T1: float, table: DivisorTable):
    # Delta falls between integer jumps, so its sup sits just right of a jump
    # and its inf just left of the next one
    n = np.arange(math.ceil(T0), math.floor(T1) + 1, dtype=np.float64)
    t = np.concatenate(([T0], n, [T1]))
    right = delta(t, table)
    left = right.copy()
    left[1:-1] = (table.D[n.astype(np.int64) - 1] - _smooth(n)).astype(np.float64)
    return np.concatenate((t, t)), np.concatenate((right, left))


def omega_scan(target, T: float, H: float, store: QuadratureCheckpointStore,
               table: DivisorTable | None = None, thresholds=(0.0, 0.0)) -> OmegaScan:
    """Largest and smallest values of f/comparator over [T, T+H].

    ``thresholds = (A, B)`` are checked as f > A*comparator and
    f < -B*comparator.  ``D`` is the largest constant with both
    f > D*comparator and f < -D*comparator attained (0 if one sign is missing).
    """
    target = _norm_target(target)
    if callable(target) or target == "delta_star":
        raise ConfigError(f"omega_scan does not support target {target!r}")
    table = store.table if table is None else table
    if T < 1 or H <= 0:
        raise ConfigError("scan window must have T >= 1 and H > 0")
    best = [-math.inf, 0.0, 0.0, math.inf, 0.0, 0.0]  # rmax, t, f, rmin, t, f
    if target == "delta":
        chunks = [_delta_extremes(a, b, table) for a, b in _pieces(T, T + H, 1 << 16)]
    else:
        chunks = ((r.t.ravel(), _field(r, target).ravel()) for r in iter_march(store, T, T + H))
    for t, f in chunks:
        r = f / comparator(target, t)
        i, j = int(np.argmax(r)), int(np.argmin(r))
        if r[i] > best[0]:
            best[:3] = [float(r[i]), float(t[i]), float(f[i])]
        if r[j] < best[3]:
            best[3:] = [float(r[j]), float(t[j]), float(f[j])]
    rpos, rneg = best[0], best[3]
    A, B = thresholds
    both = rpos > 0 and rneg < 0
    D = min(rpos, -rneg) if both else 0.0
    return OmegaScan(target, float(T), float(H), best[1], best[2], best[4], best[5],
                     rpos, rneg, max(abs(rpos), abs(rneg)), rpos > A, rneg < -B, both, D)


__all__ = ["MomentReport", "OmegaScan", "CubicFit", "TARGETS", "window_moment",
           "window_integral", "theorem_ratio_sweep", "ratio_spread", "global_moment_series",
           "fit_global_moment", "fit_cubic_log", "omega_scan", "comparator", "moment_scale",
           "default_H"]
