"""Checkpointed cumulative quadrature of |zeta(1/2+it)|^2.

The store integrates two smooth integrands on uniform Gauss-Legendre panels of
width ``h``: g(u) = |zeta(1/2+iu)|^2 and u*g(u).  With

    M(t) = int_0^t g,   U(t) = int_0^t u g,

everything else follows without nested quadrature:

    E(t)        = M(t) - t (log(t/2pi) + 2 gamma - 1)
    E*(t)       = M(t) - pi * A(floor(2t/pi))            (A = alternating prefix of d)
    int_0^t E*  = t M(t) - U(t) - pi (t A(m) - (pi/2) nA(m)),   m = floor(2t/pi)

Checkpoints are written every ``spacing`` panels to two append-only text files
(``kind=zeta2`` holds M, ``kind=estar`` holds int_0^t E*).  U is recovered from
the pair on load; the in-memory build performs the same recovery at every
checkpoint, so a resumed build is bit-identical to an uninterrupted one.
"""
from __future__ import annotations

import fcntl
import math
import os
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from numpy.polynomial import legendre as npleg

from .compsum import ccumsum
from .divisor import MAIN_C_LD, DivisorTable
from .errors import CapacityError, PersistenceError, PrecisionError
from .zeta import RS_ERR_CONST, RS_THRESHOLD, TWO_PI, zeta_abs2

GL_ORDER = 8
CKPT_VERSION = "v1"
DEFAULT_SPACING = 64
BLOCK_CHECKPOINTS = 256
HALF_PI = 0.5 * math.pi


def _gauss_tables(order: int):
    x, w = npleg.leggauss(order)
    V = npleg.legvander(x, order - 1)
    Q = np.empty_like(V)
    for k in range(order):
        c = np.zeros(order)
        c[k] = 1.0
        Q[:, k] = npleg.legval(x, npleg.legint(c, lbnd=-1))
    return x, w, Q @ np.linalg.inv(V)


# nodes, weights and the spectral integration matrix S[i, j] = int_{-1}^{x_i} l_j
GL_X, GL_W, GL_S = _gauss_tables(GL_ORDER)


def default_step(t_max: float) -> float:
    """Largest step of the form 1/(40 k) satisfying h <= 0.25 / log(2 + t_max)."""
    bound = 0.25 / math.log(2.0 + t_max)
    k = max(1, math.ceil(1.0 / (40.0 * bound)))
    return 1.0 / (40.0 * k)


def eps_quad(T: float) -> float:
    """Accuracy target for int_0^T |zeta|^2."""
    return 1e-3 * max(1.0, T ** 0.25)


def _rs_round_err(t: float) -> float:
    if t < RS_THRESHOLD:
        return 0.0
    th = 0.5 * t * math.log(t / TWO_PI)
    return 4 * 2.220446049250313e-16 * (th + 1.0) * math.sqrt(math.sqrt(t / TWO_PI) + 1.0)


def _m_upper(t: float) -> float:
    # generous upper bound for int_0^t |zeta|^2
    return t * (max(math.log(t / TWO_PI), 0.0) + 1.2) + 4.0 * math.sqrt(t) + 20.0


def zeta2_error_bound(T: float, M: float, h: float) -> float:
    """Bound on |computed M(T) - M(T)| from the per-point zeta error and roundoff.

    Cauchy-Schwarz on dyadic blocks [t, 2t] of the Riemann-Siegel range, so the
    large early point errors are weighted by the small early mass.  The rule
    error of order-8 Gauss panels at the configured step is far below this and
    is checked by grid halving instead of being estimated.
    """
    lo = min(T, RS_THRESHOLD)
    J0 = lo * 1e-24
    total = 2 * math.sqrt(_m_upper(lo) * J0) + J0
    a = RS_THRESHOLD
    while a < T:
        b = min(2 * a, T)
        J = RS_ERR_CONST ** 2 / 4.5 * (a ** -4.5 - b ** -4.5) + _rs_round_err(b) ** 2 * (b - a)
        total += 2 * math.sqrt(_m_upper(b) * J) + J
        a = b
    n_ckpt = max(1.0, T / h / DEFAULT_SPACING)
    return total + 4e-16 * abs(M) * math.sqrt(n_ckpt)


def _fmt(x: float) -> str:
    return np.format_float_positional(float(x), precision=17, unique=False,
                                      fractional=False, trim="-")


def estar_integral(t, M, U, table: DivisorTable):
    """int_0^t E* from M(t), U(t) and the exact step integral."""
    t = np.asarray(t, dtype=np.float64)
    m = np.floor(t / HALF_PI).astype(np.int64)
    table.require(m, "floor(2t/pi)")
    step = t * table.A[m] - HALF_PI * table.nA[m]
    return t * M - U - math.pi * step


def recover_u(t: float, M: float, I: float, table: DivisorTable) -> float:
    m = int(math.floor(t / HALF_PI))
    table.require(m, "floor(2t/pi)")
    step = t * float(table.A[m]) - HALF_PI * float(table.nA[m])
    return t * M - I - math.pi * step


@dataclass
class MarchResult:
    """Node-level output of one march.

    Per-node arrays have shape (panels, 8).  ``stop_M``/``stop_U`` give the
    state at each requested stop time, in the order given.
    """

    t: np.ndarray
    wt: np.ndarray
    g: np.ndarray
    M: np.ndarray
    U: np.ndarray
    E: np.ndarray
    E_star: np.ndarray
    R: np.ndarray
    panel_a: np.ndarray
    panel_b: np.ndarray
    stops: np.ndarray
    stop_M: np.ndarray
    stop_U: np.ndarray
    err: float


def panel_edges(t0: float, t1: float, h: float, stops=(), split_steps: bool = False):
    """Panel edges covering [t0, t1] with width <= h.

    Breakpoints (stops, and the jump points pi n / 2 when ``split_steps``) are
    always panel edges.
    """
    brk = [t0, t1]
    brk += [s for s in stops if t0 < s < t1]
    if split_steps:
        n0 = math.floor(t0 / HALF_PI) + 1
        n1 = math.ceil(t1 / HALF_PI)
        brk += [n * HALF_PI for n in range(n0, n1) if t0 < n * HALF_PI < t1]
    brk = np.unique(np.asarray(brk, dtype=np.float64))
    edges = [brk[:1]]
    for a, b in zip(brk[:-1], brk[1:]):
        k = max(1, math.ceil((b - a) / h * (1 - 1e-12)))
        edges.append(a + (b - a) * np.arange(1, k + 1) / k)
        edges[-1][-1] = b
    return np.concatenate(edges)


def march(table: DivisorTable, t0: float, M0: float, U0: float, t1: float, h: float,
          stops=(), split_steps: bool = False, edges=None) -> MarchResult:
    """Integrate from a known state (M0, U0) at t0 up to t1 and evaluate the error terms."""
    if edges is None:
        edges = panel_edges(t0, t1, h, stops, split_steps)
    a = edges[:-1]
    b = edges[1:]
    hw = 0.5 * (b - a)
    t = a[:, None] + hw[:, None] * (1.0 + GL_X[None, :])
    g, ge = zeta_abs2(t.ravel())
    g = g.reshape(t.shape)
    tg = t * g
    incM = hw * (g @ GL_W)
    incU = hw * (tg @ GL_W)
    M_end = ccumsum(incM, M0)
    U_end = ccumsum(incU, U0)
    M_a = np.concatenate(([M0], M_end[:-1]))
    U_a = np.concatenate(([U0], U_end[:-1]))
    M = M_a[:, None] + hw[:, None] * (g @ GL_S.T)
    U = U_a[:, None] + hw[:, None] * (tg @ GL_S.T)
    m = np.floor(t / HALF_PI).astype(np.int64)
    table.require(m, "floor(2t/pi)")
    A = table.A[m].astype(np.float64)
    E_star = M - math.pi * A
    tl = t.astype(np.longdouble)
    E = (M.astype(np.longdouble) - tl * (np.log(tl / TWO_PI) + MAIN_C_LD)).astype(np.float64)
    I = t * M - U - math.pi * (t * A - HALF_PI * table.nA[m])
    R = I - 0.75 * math.pi * t
    wt = hw[:, None] * GL_W[None, :]
    stops = np.asarray(stops, dtype=np.float64)
    idx = np.searchsorted(b, stops)
    ok = (idx < b.shape[0])
    if not np.all(ok) or not np.allclose(b[idx], stops, rtol=0, atol=1e-9 * max(1.0, t1)):
        raise ValueError("stop times must lie in (t0, t1]")
    err = float(np.sum(hw[:, None] * GL_W * ge.reshape(t.shape)))
    return MarchResult(t, wt, g, M, U, E, E_star, R, a, b, stops,
                       M_end[idx], U_end[idx], err)


class QuadratureCheckpointStore:
    """Cumulative int_0^t |zeta|^2 and int_0^t E* on a fixed uniform grid.

    ``directory=None`` keeps the store in memory only.
    """

    def __init__(self, table: DivisorTable, h: float | None = None, t_max: float = 2.0e4,
                 directory=None, spacing: int = DEFAULT_SPACING, read_only: bool = False):
        self.table = table
        self.t_max = float(t_max)
        self.h = float(h) if h is not None else default_step(self.t_max)
        self.spacing = int(spacing)
        self.read_only = read_only
        self.directory = Path(directory) if directory is not None else None
        self._t = [0.0]
        self._M = [0.0]
        self._I = [0.0]
        self._U = [0.0]
        if self.directory is not None:
            self._load()

    # persistence -------------------------------------------------------
    def _path(self, kind: str) -> Path:
        return self.directory / f"{kind}-h{_fmt(self.h)}-s{self.spacing}.ckpt"

    def _header(self, kind: str) -> str:
        return f"zmslab-ckpt {CKPT_VERSION} h={_fmt(self.h)} kind={kind}\n"

    def _read(self, kind: str) -> list[tuple[float, float]]:
        path = self._path(kind)
        if not path.exists():
            return []
        try:
            text = path.read_text()
        except OSError as exc:
            raise PersistenceError(f"cannot read {path}: {exc}") from exc
        lines = text.split("\n")
        if not lines or lines[0] + "\n" != self._header(kind):
            raise PersistenceError(f"{path}: header mismatch")
        rows = []
        # the last element is '' for a complete file or a torn record
        for line in lines[1:-1]:
            ts, vs = line.split("\t")
            rows.append((float(ts), float(vs)))
        return rows

    def _load(self) -> None:
        try:
            self.directory.mkdir(parents=True, exist_ok=True)
        except OSError as exc:
            if not self.read_only:
                raise PersistenceError(f"cannot create {self.directory}: {exc}") from exc
        z = self._read("zeta2")
        e = self._read("estar")
        n = min(len(z), len(e))
        for k in range(n):
            t = k * self.spacing * self.h
            if z[k][0] != float(_fmt(t)) or e[k][0] != z[k][0]:
                raise PersistenceError(f"checkpoint {k} is off the grid of this store")
        if n == 0:
            if not self.read_only:
                self._rewrite([], [])
            return
        if not self.read_only and (len(z) != n or len(e) != n or self._torn()):
            self._rewrite(z[:n], e[:n])
        self._t = [z[k][0] for k in range(n)]
        self._M = [z[k][1] for k in range(n)]
        self._I = [e[k][1] for k in range(n)]
        self._U = [recover_u(t, M, I, self.table) for t, M, I in zip(self._t, self._M, self._I)]

    def _torn(self) -> bool:
        return any(not self._path(k).read_bytes().endswith(b"\n") for k in ("zeta2", "estar"))

    def _rewrite(self, z, e) -> None:
        for kind, rows in (("zeta2", z), ("estar", e)):
            body = self._header(kind) + "".join(f"{_fmt(t)}\t{_fmt(v)}\n" for t, v in rows)
            if not rows:
                body += f"{_fmt(0.0)}\t{_fmt(0.0)}\n"
            try:
                self._path(kind).write_text(body)
            except OSError as exc:
                raise PersistenceError(f"cannot write {self._path(kind)}: {exc}") from exc

    def _append(self, rows) -> None:
        if self.directory is None or self.read_only:
            return
        zp, ep = self._path("zeta2"), self._path("estar")
        try:
            with open(zp, "a") as fz, open(ep, "a") as fe:
                fcntl.flock(fz, fcntl.LOCK_EX)
                fe.write("".join(f"{_fmt(t)}\t{_fmt(I)}\n" for t, _, I in rows))
                fe.flush()
                fz.write("".join(f"{_fmt(t)}\t{_fmt(M)}\n" for t, M, _ in rows))
                fz.flush()
                os.fsync(fz.fileno())
                fcntl.flock(fz, fcntl.LOCK_UN)
        except OSError as exc:
            raise PersistenceError(f"cannot append checkpoints: {exc}") from exc

    # building ----------------------------------------------------------
    @property
    def checkpoint_spacing(self) -> float:
        return self.spacing * self.h

    @property
    def t_covered(self) -> float:
        return self._t[-1]

    def records(self):
        """(t, M, int E*) triples currently held."""
        return list(zip(self._t, self._M, self._I))

    def extend_to(self, T: float) -> None:
        """Append checkpoints until the store covers T."""
        if T > self.t_max:
            raise CapacityError(f"T = {T} exceeds store t_max = {self.t_max}")
        if self.read_only and T > self._t[-1]:
            raise PersistenceError("read-only store does not cover the requested T")
        S = self.spacing
        while self._t[-1] < T:
            k0 = len(self._t) - 1
            nb = min(BLOCK_CHECKPOINTS, math.ceil((T - self._t[-1]) / (S * self.h)))
            idx = np.arange(k0 * S, (k0 + nb) * S + 1, dtype=np.float64)
            edges = idx * self.h
            t = edges[:-1, None] + 0.5 * self.h * (1.0 + GL_X[None, :])
            g, _ = zeta_abs2(t.ravel())
            g = g.reshape(t.shape)
            incM = (0.5 * self.h) * (g @ GL_W)
            incU = (0.5 * self.h) * ((t * g) @ GL_W)
            rows = []
            for j in range(nb):
                sl = slice(j * S, (j + 1) * S)
                tc = float((k0 + j + 1) * S) * self.h
                M = math.fsum([self._M[-1], *incM[sl]])
                U = math.fsum([self._U[-1], *incU[sl]])
                I = float(estar_integral(tc, M, U, self.table))
                M, I = float(_fmt(M)), float(_fmt(I))
                self._t.append(float(_fmt(tc)))
                self._M.append(M)
                self._I.append(I)
                self._U.append(recover_u(self._t[-1], M, I, self.table))
                rows.append((self._t[-1], M, I))
            self._append(rows)

    # queries -----------------------------------------------------------
    def state_before(self, T: float):
        """Last checkpoint (t, M, U) with t <= T, extending the store if needed."""
        self.extend_to(T)
        k = int(np.searchsorted(np.asarray(self._t), T, side="right")) - 1
        return self._t[k], self._M[k], self._U[k]

    def state_at(self, T: float):
        """(M(T), U(T), err) by marching from the nearest checkpoint."""
        if T < 0:
            raise ValueError("T must be >= 0")
        tc, Mc, Uc = self.state_before(T)
        if T == tc:
            M, U = Mc, Uc
        else:
            r = march(self.table, tc, Mc, Uc, T, self.h, stops=(T,))
            M, U = float(r.stop_M[0]), float(r.stop_U[0])
        return M, U, zeta2_error_bound(T, M, self.h)

    def march_window(self, T0: float, T1: float, stops=(), split_steps: bool = True) -> MarchResult:
        """Node-level march covering [T0, T1]; nodes before T0 are dropped."""
        tc, Mc, Uc = self.state_before(T1)
        tc, Mc, Uc = self.state_before(T0)
        allstops = sorted(set([T0, T1, *stops]) - {tc})
        r = march(self.table, tc, Mc, Uc, T1, self.h, stops=allstops, split_steps=split_steps)
        keep = r.panel_a >= T0 - 1e-12 * max(1.0, T0)
        return MarchResult(r.t[keep], r.wt[keep], r.g[keep], r.M[keep], r.U[keep], r.E[keep],
                           r.E_star[keep], r.R[keep], r.panel_a[keep], r.panel_b[keep],
                           r.stops, r.stop_M, r.stop_U, r.err)


def mean_square_integral(T: float, store: QuadratureCheckpointStore, check: bool = True) -> float:
    """int_0^T |zeta(1/2+it)|^2 dt from the checkpoint store."""
    if T == 0:
        return 0.0
    M, _, err = store.state_at(T)
    if check and err > eps_quad(T):
        raise PrecisionError(f"quadrature error {err:.3g} exceeds target {eps_quad(T):.3g}",
                             achieved=err, value=M)
    return M
