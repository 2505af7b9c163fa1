"""Wall-clock comparison of the numba kernels against their numpy fallbacks.

    python3 benchmarks/bench_kernels.py [--repeat 3]

Each kernel is called directly in both variants, so one process covers both
backends; the numba variant is warmed up once before timing.
"""
import argparse
import time

import numpy as np

from zmslab import compsum, divisor, zeta
from zmslab._accel import HAVE_NUMBA


def _best(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def _rs(kern, t):
    out, err = np.empty_like(t), np.empty_like(t)
    kern(t, zeta._RS_TABLE, out, err, 0, t.size)


def cases():
    x = np.random.default_rng(0).standard_normal(2_000_000)
    t = np.linspace(1e3, 2e4, 20_000)
    return {
        "sieve 1e7": (lambda: divisor._sieve_nb(10 ** 7), lambda: divisor._sieve_np(10 ** 7)),
        "riemann-siegel 2e4 pts": (lambda: _rs(zeta._rs_z_nb, t), lambda: _rs(zeta._rs_z_np, t)),
        "csum 2e6": (lambda: compsum._neumaier_chunks_nb(x, compsum.CHUNK),
                     lambda: compsum._neumaier_chunks_np(x, compsum.CHUNK)),
        "ccumsum 2e6": (lambda: compsum._ccumsum_nb(x, 0.0),
                        lambda: compsum._ccumsum_np(x, 0.0)),
    }


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    if not HAVE_NUMBA:
        raise SystemExit("numba is not installed; nothing to compare")
    print(f"{'kernel':<26}{'numba s':>10}{'numpy s':>10}{'speedup':>10}")
    for name, (nb, np_) in cases().items():
        nb()
        a, b = _best(nb, args.repeat), _best(np_, args.repeat)
        print(f"{name:<26}{a:>10.4f}{b:>10.4f}{b / a:>10.1f}")


if __name__ == "__main__":
    main()
