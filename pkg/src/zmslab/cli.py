"""Command-line front end.

Every subcommand writes one CSV or JSON artifact (to ``--out`` or stdout) and
a final summary line ``OK|FAIL <name> <metric>=<value>`` on stderr.
Exit status: 0 ok, 1 usage or failed check, 2 precision miss, 3 capacity or
persistence problem.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from dataclasses import dataclass, fields, replace
from pathlib import Path

import numpy as np

from . import _accel
from . import explicit as ex
from .divisor import (DivisorTable, build_divisor_table, d_squared_weighted_sum, delta,
                      delta_star, integral_delta_exact, integral_delta_star_exact)
from .error_terms import E_quad, R_quad, integral_E_quad
from .errors import ConfigError, PrecisionError, ZmslabError
from .meansquare import (fit_global_moment, omega_scan, ratio_spread, theorem_ratio_sweep,
                         window_moment)
from .quadrature import QuadratureCheckpointStore, _fmt, default_step
from .verify import SUITES, Context, run_suite


@dataclass(frozen=True)
class RunConfig:
    t_max: float = 2.0e4
    h: float = 0.0
    spacing: int = 64
    table_limit: int = 10 ** 7
    checkpoint_dir: str = ""
    read_only: bool = False
    format: str = "csv"
    quad_tol: float = 1e-3
    threads: int = 1

    def validate(self) -> "RunConfig":
        for name in ("t_max", "spacing", "table_limit", "quad_tol", "threads"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"{name} must be positive")
        if self.h < 0:
            raise ConfigError("h must be positive (0 selects the default step)")
        if self.format not in ("csv", "json"):
            raise ConfigError("format must be csv or json")
        if self.checkpoint_dir and not self.read_only:
            p = Path(self.checkpoint_dir)
            p.mkdir(parents=True, exist_ok=True)
            if not p.is_dir() or not _writable(p):
                raise ConfigError(f"checkpoint directory {p} is not writable; use read_only")
        return self

    @property
    def step(self) -> float:
        return self.h if self.h > 0 else default_step(self.t_max)


def _writable(p: Path) -> bool:
    return os.access(p, os.W_OK)


def _coerce(name: str, raw: str):
    kind = {f.name: f.type for f in fields(RunConfig)}[name]
    if kind == "bool":
        return str(raw).strip().lower() in ("1", "true", "yes", "on")
    if kind == "int":
        return int(float(raw))
    if kind == "float":
        return float(raw)
    return str(raw)


def load_config_file(path) -> dict:
    """Plain ``key = value`` lines; ``#`` starts a comment."""
    known = {f.name for f in fields(RunConfig)}
    out = {}
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key=value")
        key, val = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in known:
            raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
        try:
            out[key] = _coerce(key, val)
        except ValueError as exc:
            raise ConfigError(f"{path}:{lineno}: bad value for {key}") from exc
    return out


def resolve_config(args) -> RunConfig:
    """Flags override the config file, which overrides the defaults."""
    cfg = RunConfig()
    if args.config:
        cfg = replace(cfg, **load_config_file(args.config))
    flags = {f.name: getattr(args, f.name) for f in fields(RunConfig)
             if getattr(args, f.name, None) is not None}
    return replace(cfg, **flags).validate()


# output ---------------------------------------------------------------

def _cell(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if math.isnan(v) or math.isinf(v):
            return str(v)
        return _fmt(v)
    return "" if v is None else str(v)


def render(header, rows, fmt: str) -> str:
    if fmt == "json":
        recs = [dict(zip(header, (_json_val(v) for v in r))) for r in rows]
        return json.dumps(recs, indent=1) + "\n"
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([_cell(v) for v in r])
    return buf.getvalue()


def _json_val(v):
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return v if math.isfinite(v) else str(v)
    return v


# shared resources -----------------------------------------------------

class Session:
    def __init__(self, cfg: RunConfig):
        self.cfg = cfg
        self._table = None
        self._store = None

    @property
    def table(self) -> DivisorTable:
        if self._table is None:
            self._table = _cached_table(self.cfg)
        return self._table

    @property
    def store(self) -> QuadratureCheckpointStore:
        if self._store is None:
            self._store = QuadratureCheckpointStore(
                self.table, h=self.cfg.step, t_max=self.cfg.t_max,
                directory=self.cfg.checkpoint_dir or None, spacing=self.cfg.spacing,
                read_only=self.cfg.read_only)
        return self._store

    def context(self) -> Context:
        ctx = Context(table_limit=self.cfg.table_limit, t_max=self.cfg.t_max,
                      h=self.cfg.step, checkpoint_dir=self.cfg.checkpoint_dir or None,
                      spacing=self.cfg.spacing, read_only=self.cfg.read_only, table=self.table)
        return ctx

    def check_quad(self, T: float, err: float) -> None:
        tol = self.cfg.quad_tol * max(1.0, T ** 0.25)
        if err > tol:
            raise PrecisionError(f"quadrature error {err:.3g} above {tol:.3g} at T={T}",
                                 achieved=err)


def _cached_table(cfg: RunConfig) -> DivisorTable:
    if cfg.checkpoint_dir:
        path = Path(cfg.checkpoint_dir) / f"divisors-{cfg.table_limit}.bin"
        if path.exists():
            return DivisorTable.load(path)
        table = build_divisor_table(cfg.table_limit)
        if not cfg.read_only:
            table.save(path)
        return table
    return build_divisor_table(cfg.table_limit)


# subcommands ----------------------------------------------------------

def cmd_sieve(args, s: Session):
    t = build_divisor_table(args.limit)
    if args.save:
        t.save(args.save)
    L = t.limit
    rows = [(L, int(t.D[L]), int(t.A[L]), int(t.d[1:].max(initial=0)))]
    return ("limit", "D", "A", "d_max"), rows, ("D", rows[0][1]), True


def _eval_one(what: str, t: float, method: str, s: Session):
    if what == "delta":
        if method == "explicit":
            return ex.voronoi_delta(t, args_N(t, s), s.table), math.nan, "voronoi"
        return delta(t, s.table), 0.0, "exact"
    if what == "delta-star":
        if method == "explicit":
            return ex.voronoi_delta_star(t, args_N(t, s), s.table), math.nan, "voronoi"
        return delta_star(t, s.table), 0.0, "exact"
    if what == "E":
        if method == "explicit":
            return ex.atkinson_E(t, None, s.table), 10 * math.log(t) ** 2, "atkinson"
        v, err = E_quad(t, s.store, with_error=True)
        s.check_quad(t, err)
        return v, err, "quadrature"
    if what == "E-star":
        dss = 2 * math.pi * delta_star(t / (2 * math.pi), s.table)
        if method == "explicit":
            return ex.atkinson_E(t, None, s.table) - dss, 10 * math.log(t) ** 2, "atkinson"
        v, err = E_quad(t, s.store, with_error=True)
        s.check_quad(t, err)
        return v - dss, err, "quadrature"
    if what == "R":
        if method == "explicit":
            r = ex.R_explicit(t, s.table)
            return r.value, 5 * t ** 0.25 + r.tail_est, "explicit"
        v, err = R_quad(t, s.store, s.table, with_error=True)
        s.check_quad(t, err / max(t, 1.0))
        return v, err, "quadrature"
    raise ConfigError(f"unknown quantity {what!r}")


def args_N(x: float, s: Session) -> float:
    return float(min(1000 * x, s.table.limit))


def cmd_eval(args, s: Session):
    rows = []
    for t in args.at:
        v, err, m = _eval_one(args.what, float(t), args.method, s)
        rows.append((float(t), float(v), float(err), m))
    return ("t", "value", "err_est", "method"), rows, ("value", rows[-1][1]), True


def cmd_series(args, s: Session):
    T, N, tab = float(args.T), args.N, s.table
    w = args.what
    tail = 0.0
    if w == "atkinson":
        val = ex.atkinson_E(T, ex.atkinson_params(T, N), tab)
        ref = E_quad(T, s.store)
        N = ex.atkinson_params(T, N).N
    elif w == "voronoi":
        N = float(N if N is not None else 100 * T)
        val = ex.voronoi_delta_star(T, N, tab)
        ref = float(delta_star(T, tab))
    elif w == "int-E":
        val = ex.integral_E(T, tab)
        ref = integral_E_quad(T, s.store)
        N = T
    elif w == "int-delta":
        N = float(N if N is not None else min(T * T, tab.limit))
        r = ex.integral_delta(T, N, tab)
        val, tail, ref = r.value, r.tail_est, float(integral_delta_exact(T, tab))
    elif w == "int-delta-star":
        r = ex.integral_delta_star(T, tab, None if N is None else int(N))
        val, tail, ref, N = r.value, r.tail_est, float(integral_delta_star_exact(T, tab)), r.n_max
    else:
        raise ConfigError(f"unknown series {w!r}")
    rows = [(w, T, float(N), float(val), float(tail), float(ref), float(val - ref))]
    return (("what", "T", "N", "value", "tail_est", "reference", "defect"), rows,
            ("defect", rows[0][-1]), True)


def _target(name: str) -> str:
    return name.replace("-", "_")


def cmd_moment(args, s: Session):
    r = window_moment(_target(args.target), args.T, args.H, args.k, s.store, s.table)
    return r.FIELDS, [r.row()], ("ratio", r.ratio), True


def cmd_sweep(args, s: Session):
    if not (0 < args.Tmin <= args.Tmax) or args.points < 1:
        raise ConfigError("need 0 < Tmin <= Tmax and points >= 1")
    Ts = np.geomspace(args.Tmin, args.Tmax, args.points) if args.points > 1 else [args.Tmin]
    reps = theorem_ratio_sweep(_target(args.target), args.k, [float(x) for x in Ts], s.store,
                               s.table, H_rule=lambda T: T ** args.H_exp)
    spread = ratio_spread(reps)
    return reps[0].FIELDS, [r.row() for r in reps], ("spread", spread), True


def cmd_fit(args, s: Session):
    if args.what == "lemma3":
        lo, hi = args.Tmin or 1e4, args.Tmax or 1e7
        grid = np.floor(np.geomspace(lo, hi, args.points))
        r = d_squared_weighted_sum(grid[-1], args.a, s.table, fit_grid=grid)
        c, power, resid = r.coefficients, args.a + 1, r.residual_norm
    else:
        lo, hi = args.Tmin or 1e2, args.Tmax or 1e4
        target, power = ("E_star", 4 / 3) if args.what == "P3" else ("R", 2.0)
        fit = fit_global_moment(target, np.geomspace(lo, hi, args.points), power, s.store, s.table)
        c, resid = fit.coefficients, fit.residual_norm
    rows = [(args.what, float(power), *c, float(resid), args.points, float(lo), float(hi))]
    header = ("what", "power", "c0", "c1", "c2", "c3", "residual_norm", "points", "Tmin", "Tmax")
    return header, rows, ("c3", c[3]), True


def cmd_scan(args, s: Session):
    H = args.H if args.H is not None else args.T ** 0.7
    r = omega_scan(_target(args.target), args.T, H, s.store, s.table, (args.A, args.B))
    return r.FIELDS, [r.row()], ("ratio_abs", r.ratio_abs), True


def cmd_verify(args, s: Session):
    res = run_suite(args.suite, s.context())
    n_ok = sum(r.ok for r in res)
    return (res[0].FIELDS if res else ()), [r.row() for r in res], \
        ("passed", f"{n_ok}/{len(res)}"), n_ok == len(res)


COMMANDS = {"sieve": cmd_sieve, "eval": cmd_eval, "series": cmd_series, "moment": cmd_moment,
            "sweep": cmd_sweep, "fit": cmd_fit, "scan": cmd_scan, "verify": cmd_verify}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise ConfigError(f"{self.prog}: {message}")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    g = common.add_argument_group("run configuration")
    g.add_argument("--config", help="key=value configuration file")
    g.add_argument("--t-max", dest="t_max", type=float)
    g.add_argument("--h", type=float, help="quadrature panel width")
    g.add_argument("--spacing", type=int, help="panels per checkpoint")
    g.add_argument("--table-limit", dest="table_limit", type=int)
    g.add_argument("--checkpoint-dir", dest="checkpoint_dir")
    g.add_argument("--read-only", dest="read_only", action="store_const", const=True)
    g.add_argument("--format", choices=("csv", "json"))
    g.add_argument("--quad-tol", dest="quad_tol", type=float)
    g.add_argument("--threads", type=int)
    g.add_argument("--out", help="artifact path (default stdout)")

    p = _Parser(prog="zmslab", description="Divisor and zeta mean-square error-term lab.")
    sub = p.add_subparsers(dest="cmd", required=True, parser_class=_Parser)

    q = sub.add_parser("sieve", parents=[common], help="build a divisor table")
    q.add_argument("--limit", type=int, required=True)
    q.add_argument("--save")

    q = sub.add_parser("eval", parents=[common], help="evaluate an error term")
    q.add_argument("--what", required=True, choices=("delta", "delta-star", "E", "E-star", "R"))
    q.add_argument("--at", required=True, type=float, nargs="+")
    q.add_argument("--method", default="quadrature", choices=("quadrature", "explicit"))

    q = sub.add_parser("series", parents=[common], help="explicit truncated formula")
    q.add_argument("--what", required=True,
                   choices=("atkinson", "voronoi", "int-E", "int-delta", "int-delta-star"))
    q.add_argument("--T", required=True, type=float)
    q.add_argument("--N", type=float)

    targets = ("E-star", "R", "E", "delta", "delta-star")
    q = sub.add_parser("moment", parents=[common], help="windowed moment")
    q.add_argument("--target", required=True, choices=targets)
    q.add_argument("--T", required=True, type=float)
    q.add_argument("--H", required=True, type=float)
    q.add_argument("--k", type=int, default=2)

    q = sub.add_parser("sweep", parents=[common], help="moment ratios over a T grid")
    q.add_argument("--target", required=True, choices=targets)
    q.add_argument("--k", type=int, default=2)
    q.add_argument("--Tmin", type=float, required=True)
    q.add_argument("--Tmax", type=float, required=True)
    q.add_argument("--points", type=int, default=3)
    q.add_argument("--H-exp", dest="H_exp", type=float, default=0.7)

    q = sub.add_parser("fit", parents=[common], help="cubic-in-log fits")
    q.add_argument("--what", required=True, choices=("P3", "p3", "lemma3"))
    q.add_argument("--Tmin", type=float)
    q.add_argument("--Tmax", type=float)
    q.add_argument("--points", type=int, default=12)
    q.add_argument("--a", type=float, default=0.0)

    q = sub.add_parser("scan", parents=[common], help="large-value scan")
    q.add_argument("--target", required=True, choices=("E-star", "R", "E", "delta"))
    q.add_argument("--T", required=True, type=float)
    q.add_argument("--H", type=float)
    q.add_argument("--A", type=float, default=0.0)
    q.add_argument("--B", type=float, default=0.0)

    q = sub.add_parser("verify", parents=[common], help="verification suites")
    q.add_argument("--suite", default="all", choices=(*SUITES, "all"))
    return p


def main(argv=None) -> int:
    name = "zmslab"
    try:
        args = build_parser().parse_args(argv)
        name = args.suite if args.cmd == "verify" else args.cmd
        cfg = resolve_config(args)
        _accel.set_threads(cfg.threads)
        header, rows, (metric, value), ok = COMMANDS[args.cmd](args, Session(cfg))
        text = render(header, rows, cfg.format)
        if args.out:
            Path(args.out).write_text(text)
        else:
            sys.stdout.write(text)
            sys.stdout.flush()
        shown = value if isinstance(value, str) else _cell(value)
        print(f"{'OK' if ok else 'FAIL'} {name} {metric}={shown}", file=sys.stderr)
        return 0 if ok else 1
    except PrecisionError as exc:
        print(f"error: {exc}", file=sys.stderr)
        print(f"FAIL {name} achieved={_cell(float(exc.achieved))}", file=sys.stderr)
        return exc.exit_code
    except ZmslabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        print(f"FAIL {name} error={type(exc).__name__}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        print(f"FAIL {name} error=OSError", file=sys.stderr)
        return 3


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
