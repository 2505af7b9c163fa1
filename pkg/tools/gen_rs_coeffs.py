"""Generate Taylor coefficients of the Riemann-Siegel correction terms C0..C4.

The coefficients are expansions in u = p - 1/2, where p is the fractional part
of sqrt(t / 2pi).  Output is written to src/zmslab/_rs_coeffs.py.

    python tools/gen_rs_coeffs.py
"""
from pathlib import Path

import mpmath as mp

mp.mp.dps = 160
DEG = 140
KEEP_TOL = mp.mpf("1e-19")


def series_cos(a, b, deg):
    # cos(a*u^2 + b) as a power series in u
    out = [mp.mpf(0)] * (deg + 1)
    ca, sa = mp.cos(b), mp.sin(b)
    # cos(a u^2) and sin(a u^2)
    for k in range(0, deg // 2 + 1):
        term = a ** k / mp.factorial(k)
        if 2 * k > deg:
            break
        if k % 4 == 0:
            out[2 * k] += ca * term
        elif k % 4 == 1:
            out[2 * k] -= sa * term
        elif k % 4 == 2:
            out[2 * k] -= ca * term
        else:
            out[2 * k] += sa * term
    return out


def psi_series(deg):
    num = series_cos(2 * mp.pi, -5 * mp.pi / 8, deg)
    num = [-c for c in num]
    den = [mp.mpf(0)] * (deg + 1)
    for k in range(0, deg // 2 + 1):
        den[2 * k] = (-1) ** k * (2 * mp.pi) ** (2 * k) / mp.factorial(2 * k)
    q = [mp.mpf(0)] * (deg + 1)
    for n in range(deg + 1):
        s = num[n] - sum(q[j] * den[n - j] for j in range(n))
        q[n] = s / den[0]
    return q


def deriv(c, k):
    out = []
    for n in range(len(c) - k):
        out.append(c[n + k] * mp.factorial(n + k) / mp.factorial(n))
    return out


def add(*terms):
    n = min(len(c) for _, c in terms)
    return [sum(w * c[i] for w, c in terms) for i in range(n)]


def main():
    psi = psi_series(DEG)
    pi = mp.pi
    d = {k: deriv(psi, k) for k in range(13)}
    cs = [
        add((1, d[0])),
        add((-1 / (96 * pi**2), d[3])),
        add((1 / (64 * pi**2), d[2]), (1 / (18432 * pi**4), d[6])),
        add((-1 / (64 * pi**2), d[1]), (-1 / (3840 * pi**4), d[5]),
            (-1 / (5308416 * pi**6), d[9])),
        add((1 / (128 * pi**2), d[0]), (mp.mpf(19) / (24576 * pi**4), d[4]),
            (mp.mpf(11) / (5898240 * pi**6), d[8]),
            (1 / (2038431744 * pi**8), d[12])),
    ]
    lines = ['"""Taylor coefficients of the Riemann-Siegel corrections C0..C4 in u = p - 1/2.',
             "",
             "Generated by tools/gen_rs_coeffs.py; do not edit.",
             '"""', "", "RS_COEFFS = ("]
    for c in cs:
        last = max(i for i, v in enumerate(c) if abs(v) * mp.mpf(0.5) ** i > KEEP_TOL)
        vals = ", ".join(mp.nstr(v, 20, min_fixed=0, max_fixed=0) for v in c[: last + 1])
        lines.append(f"    ({vals}),")
    lines.append(")")
    out = Path(__file__).resolve().parents[1] / "src" / "zmslab" / "_rs_coeffs.py"
    out.write_text("\n".join(lines) + "\n")
    print(out, [len(c) for c in cs])


if __name__ == "__main__":
    main()
