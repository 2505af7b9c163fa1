"""Reference values of int_0^T |zeta(1/2+it)|^2 dt from mpmath alone.

Used to freeze the golden constants in the test suite.  Integrates on unit
subintervals with mpmath's tanh-sinh rule and mpmath's own zeta.
"""
import sys

import mpmath as mp

mp.mp.dps = 20


def mean_square(T, step=1):
    f = lambda t: abs(mp.zeta(mp.mpf("0.5") + 1j * t)) ** 2
    pts = [mp.mpf(k) for k in range(0, int(T), step)] + [mp.mpf(T)]
    return mp.fsum(mp.quad(f, [a, b]) for a, b in zip(pts[:-1], pts[1:]))


def error_term(T):
    T = mp.mpf(T)
    return mean_square(T) - T * (mp.log(T / (2 * mp.pi)) + 2 * mp.euler - 1)


if __name__ == "__main__":
    print("M(10) =", mp.nstr(mean_square(10), 17))
    for T in (100, 1000):
        print(f"E({T}) =", mp.nstr(error_term(T), 17))
        sys.stdout.flush()
