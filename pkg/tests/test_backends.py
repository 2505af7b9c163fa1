import math
import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from zmslab import _accel, compsum, divisor, zeta
from zmslab._accel import HAVE_NUMBA

needs_numba = pytest.mark.skipif(not HAVE_NUMBA, reason="numba not installed")


@settings(max_examples=60, deadline=None)
@given(arrays(np.float64, st.integers(0, 5000),
              elements=st.floats(-1e12, 1e12, allow_nan=False, allow_infinity=False)))
def test_csum_close_to_fsum(x):
    assert compsum.csum(x) == pytest.approx(math.fsum(x), rel=1e-15, abs=1e-3)


def test_csum_cancellation():
    x = np.array([1e16, 1.0, -1e16] * 1000)
    assert compsum.csum(x) == 1000.0


def test_ccumsum_start_and_accuracy():
    rng = np.random.default_rng(3)
    x = rng.standard_normal(20000) * 1e3
    c = compsum.ccumsum(x, 5.0)
    ref = 5.0 + np.array([math.fsum(x[: k + 1]) for k in range(0, 20000, 997)])
    assert np.allclose(c[::997], ref, rtol=0, atol=1e-9)


@needs_numba
def test_sieve_backends_agree():
    assert np.array_equal(divisor._sieve_nb(200000), divisor._sieve_np(200000))


@needs_numba
def test_csum_backends_agree():
    x = np.random.default_rng(4).standard_normal(300001)
    a = compsum._neumaier_chunks_nb(x, compsum.CHUNK)
    b = compsum._neumaier_chunks_np(x, compsum.CHUNK)
    assert a == pytest.approx(b, rel=0, abs=1e-12)


@needs_numba
def test_ccumsum_backends_agree():
    x = np.random.default_rng(5).standard_normal(100000)
    assert np.allclose(compsum._ccumsum_nb(x, 1.5), compsum._ccumsum_np(x, 1.5), rtol=0,
                       atol=1e-11)


@needs_numba
def test_riemann_siegel_backends_agree():
    t = np.linspace(30.0, 5000.0, 4001)
    out = [np.empty_like(t) for _ in range(4)]
    zeta._rs_z_nb(t, zeta._RS_TABLE, out[0], out[1], 0, t.size)
    zeta._rs_z_np(t, zeta._RS_TABLE, out[2], out[3], 0, t.size)
    assert np.allclose(out[0], out[2], rtol=0, atol=1e-11)
    assert np.allclose(out[1], out[3], rtol=1e-12)


def test_thread_count_does_not_change_results():
    t = np.linspace(30.0, 20000.0, 3 * zeta.NODE_CHUNK + 17)
    try:
        _accel.set_threads(1)
        a = zeta.riemann_siegel_z(t)
        _accel.set_threads(4)
        b = zeta.riemann_siegel_z(t)
    finally:
        _accel.set_threads(1)
    assert np.array_equal(a, b)


def test_set_threads_validation():
    with pytest.raises(ValueError):
        _accel.set_threads(0)


def test_numpy_fallback_selected_by_env_flag():
    code = ("from zmslab import backend_name, delta; from zmslab.divisor import build_divisor_table;"
            "t = build_divisor_table(100); print(backend_name(), repr(delta(10.0, t)))")
    env = dict(os.environ, ZMSLAB_DISABLE_NUMBA="1")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True,
                         check=True).stdout.split()
    assert out[0] == "numpy"
    assert float(out[1]) == pytest.approx(2.4298357720288859, abs=1e-13)
