import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from zmslab.errors import FitError
from zmslab.fitting import fit_cubic_log


def test_recovers_synthetic_cubic():
    T = np.geomspace(1e2, 1e5, 30)
    L = np.log(T)
    y = T ** 2 * (2 * L ** 3 + L)
    fit = fit_cubic_log(T, y, 2.0)
    assert np.allclose(fit.coefficients, (0.0, 1.0, 0.0, 2.0), atol=1e-6)
    assert fit.leading == pytest.approx(2.0, abs=1e-6)
    assert fit(T[5]) == pytest.approx(y[5], rel=1e-9)


@settings(max_examples=30, deadline=None)
@given(st.lists(st.floats(-5, 5), min_size=4, max_size=4),
       st.floats(0.5, 3.0))
def test_recovers_random_cubic(c, power):
    T = np.geomspace(10.0, 1e4, 20)
    L = np.log(T)
    y = T ** power * (c[0] + c[1] * L + c[2] * L ** 2 + c[3] * L ** 3)
    fit = fit_cubic_log(T, y, power)
    assert np.allclose(fit.coefficients, c, atol=1e-6)


def test_fit_errors():
    T = np.geomspace(1e2, 1e5, 7)
    with pytest.raises(FitError):
        fit_cubic_log(T, T, 1.0)
    T = np.geomspace(1e2, 2e3, 10)
    with pytest.raises(FitError):
        fit_cubic_log(T, T, 1.0)
    with pytest.raises(FitError):
        fit_cubic_log(np.geomspace(1e2, 1e5, 10), np.ones(9), 1.0)
    with pytest.raises(FitError):
        fit_cubic_log(np.linspace(-1, 1e5, 10), np.ones(10), 1.0)
