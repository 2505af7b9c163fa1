import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from zmslab.divisor import (EULER_GAMMA, DivisorTable, build_divisor_table,
                            d_squared_weighted_sum, delta, delta_star, delta_star_normalized,
                            integral_delta_exact, integral_delta_star_exact, weighted_d2_prefix)
from zmslab.errors import CapacityError, DomainError


def brute_d(n):
    return sum(1 for k in range(1, n + 1) if n % k == 0)


@pytest.mark.parametrize("n, expected", [(1, 1), (6, 4), (12, 6), (97, 2), (360, 24)])
def test_small_divisor_counts(small_table, n, expected):
    assert small_table.d[n] == expected


def test_sieve_matches_trial_division(small_table):
    assert all(small_table.d[n] == brute_d(n) for n in range(1, 1001))


def test_prefix_recurrences(small_table):
    t = small_table
    d = t.d[1:].astype(np.int64)
    sgn = np.where(np.arange(1, t.limit + 1) % 2 == 0, 1, -1)
    assert np.array_equal(np.diff(t.D), d)
    assert np.array_equal(np.diff(t.A), sgn * d)
    assert t.D[0] == 0 and t.A[0] == 0


def test_multiplicative_spot_checks(small_table):
    d = small_table.d
    for a, b in [(4, 9), (8, 15), (16, 81), (7, 11 * 13)]:
        assert d[a * b] == d[a] * d[b]


def test_table_is_read_only(small_table):
    with pytest.raises(ValueError):
        small_table.D[3] = 0


def test_capacity_errors():
    with pytest.raises(CapacityError):
        build_divisor_table(0)
    with pytest.raises(CapacityError):
        build_divisor_table(10 ** 9, memory_budget=10 ** 6)


def test_save_load_roundtrip(tmp_path, small_table):
    p = tmp_path / "d.bin"
    small_table.save(p)
    t = DivisorTable.load(p)
    assert t.limit == small_table.limit
    assert np.array_equal(t.d, small_table.d)
    assert np.array_equal(t.A, small_table.A)


def test_delta_values(small_table):
    assert delta(1.0, small_table) == pytest.approx(2 - 2 * EULER_GAMMA, abs=1e-14)
    # D(10) = 27; the trailing digits are 2.4298357..., not 2.429837
    assert small_table.D[10] == 27
    assert delta(10.0, small_table) == pytest.approx(27 - 10 * (math.log(10) + 2 * EULER_GAMMA - 1),
                                                     abs=1e-12)
    assert delta(10.0, small_table) == pytest.approx(2.429837, abs=2e-6)


def test_delta_constant_divisor_part_between_integers(small_table):
    xs = np.array([1.0, 1.2, 1.5, 1.999])
    smooth = xs * (np.log(xs) + 2 * EULER_GAMMA - 1)
    assert np.allclose(delta(xs, small_table) + smooth, 1.0, atol=1e-13)


def test_delta_domain(small_table):
    with pytest.raises(DomainError):
        delta(0.5, small_table)
    with pytest.raises(CapacityError):
        delta(2e5, small_table)


def test_delta_star_at_one(small_table):
    v = 0.5 * (-1 + 2 - 2 + 3) - (2 * EULER_GAMMA - 1)
    for form in ("combination", "alternating"):
        assert delta_star(1.0, small_table, form=form) == pytest.approx(v, abs=1e-13)
    assert v == pytest.approx(0.845569, abs=1e-6)


def test_delta_star_bad_form(small_table):
    with pytest.raises(DomainError):
        delta_star(2.0, small_table, form="other")
    with pytest.raises(CapacityError):
        delta_star(1e5, small_table)


@settings(max_examples=200, deadline=None)
@given(st.floats(min_value=1e-3, max_value=2.4e4, allow_nan=False))
def test_delta_star_forms_agree(small_table, x):
    a = delta_star(x, small_table, form="alternating")
    b = delta_star(x, small_table, form="combination")
    assert abs(a - b) <= 1e-9 * (1 + abs(a))


def test_delta_star_normalized_is_jump_midpoint(small_table):
    x = 100.0
    eps = 1e-9
    left = delta_star(x - eps, small_table)
    right = delta_star(x, small_table)
    assert delta_star_normalized(x, small_table) == pytest.approx(0.5 * (left + right), abs=1e-6)
    assert delta_star_normalized(100.1, small_table) == delta_star(100.1, small_table)


def _piecewise_quad(f, X, jumps):
    # Gauss-Legendre on each smooth piece, as an oracle for the exact integrals;
    # the first piece has a t log t endpoint, so tanh-sinh handles it
    xg, wg = np.polynomial.legendre.leggauss(20)
    edges = np.unique(np.concatenate(([0.0], jumps[jumps < X], [X])))
    total = float(mpmath.quad(lambda t: float(f(np.array([float(t)]))[0]), [0, edges[1]]))
    for a, b in zip(edges[1:-1], edges[2:]):
        t = 0.5 * (a + b) + 0.5 * (b - a) * xg
        total += 0.5 * (b - a) * np.dot(wg, f(t))
    return total


def test_integral_delta_exact_matches_quadrature(small_table):
    for X in (1.0, 7.5, 40.0, 123.4):
        f = lambda t: np.where(t < 1, -t * (np.log(np.maximum(t, 1e-300)) + 2 * EULER_GAMMA - 1),
                               np.asarray(delta(np.maximum(t, 1.0), small_table)))
        q = _piecewise_quad(f, X, np.arange(1, math.ceil(X) + 1, dtype=float))
        assert integral_delta_exact(X, small_table) == pytest.approx(q, abs=1e-9 * (1 + X * X))


def test_integral_delta_star_exact_matches_quadrature(small_table):
    for X in (0.3, 5.0, 33.3):
        q = _piecewise_quad(lambda t: delta_star(t, small_table), X,
                            np.arange(1, math.ceil(4 * X) + 1) / 4.0)
        assert integral_delta_star_exact(X, small_table) == pytest.approx(q, abs=1e-9 * (1 + X * X))


def test_d_squared_sums(small_table):
    assert d_squared_weighted_sum(1, 0.0, small_table).value == 1
    assert d_squared_weighted_sum(10, 0.0, small_table).value == 83
    assert d_squared_weighted_sum(0.5, 0.0, small_table).value == 0
    v = d_squared_weighted_sum(10, 0.5, small_table).value
    assert v == pytest.approx(sum(brute_d(n) ** 2 * n ** 0.5 for n in range(1, 11)), rel=1e-14)
    with pytest.raises(DomainError):
        d_squared_weighted_sum(10, -0.5, small_table)


def test_d_squared_prefix_strictly_increasing(small_table):
    S = weighted_d2_prefix(small_table, 5000, 0.25)
    assert np.all(np.diff(S) > 0)


def test_d2_sum_leading_coefficient(table):
    grid = np.floor(np.geomspace(1e4, 1e7, 40))
    r = d_squared_weighted_sum(1e7, 0.0, table, fit_grid=grid)
    assert r.coefficients[3] == pytest.approx(1 / math.pi ** 2, rel=0.2)
    # weighted case: leading coefficient 1/(pi^2 (a+1))
    r = d_squared_weighted_sum(1e7, 0.5, table, fit_grid=grid)
    assert r.coefficients[3] == pytest.approx(1 / (1.5 * math.pi ** 2), rel=0.2)
