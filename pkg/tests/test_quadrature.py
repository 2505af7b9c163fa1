import os
import stat

import numpy as np
import pytest

from zmslab import quadrature as qd
from zmslab.errors import CapacityError, PersistenceError, PrecisionError
from zmslab.quadrature import QuadratureCheckpointStore, default_step, mean_square_integral

# int_0^10 |zeta(1/2+it)|^2 dt from mpmath's zeta and tanh-sinh quadrature (tools/gen_golden.py)
M10_GOLDEN = 9.9827346379189925


def test_default_step_rule():
    for t_max in (10.0, 2e4, 1e6):
        h = default_step(t_max)
        assert h <= 0.25 / np.log(2 + t_max)
        assert (1 / h) % 40 == 0


def test_zero_and_golden(small_table):
    s = QuadratureCheckpointStore(small_table, t_max=100.0)
    assert mean_square_integral(0.0, s) == 0.0
    assert mean_square_integral(10.0, s) == pytest.approx(M10_GOLDEN, abs=1e-10)
    fine = QuadratureCheckpointStore(small_table, h=s.h / 16, t_max=100.0)
    assert mean_square_integral(10.0, fine) == pytest.approx(M10_GOLDEN, abs=1e-4)


def test_monotone_and_sorted(store):
    T = np.linspace(0.0, 3000.0, 41)
    M = [mean_square_integral(t, store) for t in T]
    assert np.all(np.diff(M) >= 0)
    ts = [r[0] for r in store.records()]
    assert np.all(np.diff(ts) > 0)
    assert np.all(np.diff([r[1] for r in store.records()]) >= 0)


@pytest.mark.parametrize("T", [57.3, 1000.0, 9999.5])
def test_grid_refinement_within_error(store, store_half, T):
    M1, _, e1 = store.state_at(T)
    M2, _, _ = store_half.state_at(T)
    assert abs(M1 - M2) < 4 * e1
    assert e1 <= qd.eps_quad(T)


def test_capacity(small_table):
    s = QuadratureCheckpointStore(small_table, t_max=50.0)
    with pytest.raises(CapacityError):
        s.extend_to(60.0)


def test_precision_error(monkeypatch, small_table):
    s = QuadratureCheckpointStore(small_table, t_max=100.0)
    monkeypatch.setattr(qd, "zeta2_error_bound", lambda T, M, h: 1.0)
    with pytest.raises(PrecisionError) as exc:
        mean_square_integral(50.0, s)
    assert exc.value.achieved == 1.0 and exc.value.value > 0


def test_march_rejects_off_grid_stops(small_table):
    with pytest.raises(ValueError):
        qd.march(small_table, 0.0, 0.0, 0.0, 1.0, 0.1, stops=(2.0,))


def test_march_matches_store(store):
    r = store.march_window(1000.0, 1010.0, stops=(1005.0,))
    M, U, _ = store.state_at(1005.0)
    i = list(r.stops).index(1005.0)
    assert r.stop_M[i] == pytest.approx(M, rel=1e-13)
    assert r.stop_U[i] == pytest.approx(U, rel=1e-12)
    assert r.t.min() >= 1000.0 and r.t.max() <= 1010.0


def test_file_format(tmp_path, small_table):
    s = QuadratureCheckpointStore(small_table, t_max=200.0, directory=tmp_path)
    s.extend_to(100.0)
    z = (tmp_path / f"zeta2-h{qd._fmt(s.h)}-s64.ckpt").read_text().splitlines()
    e = (tmp_path / f"estar-h{qd._fmt(s.h)}-s64.ckpt").read_text().splitlines()
    assert z[0] == f"zmslab-ckpt v1 h={qd._fmt(s.h)} kind=zeta2"
    assert e[0].endswith("kind=estar")
    t, v = z[-1].split("\t")
    assert float(t) == s.t_covered and "e" not in v.lower()
    assert len(z) == len(e) == len(s.records()) + 1


def test_resume_is_bit_identical(tmp_path, small_table):
    a = QuadratureCheckpointStore(small_table, t_max=500.0, directory=tmp_path / "a")
    a.extend_to(400.0)
    b = QuadratureCheckpointStore(small_table, t_max=500.0, directory=tmp_path / "b")
    b.extend_to(150.0)
    b = QuadratureCheckpointStore(small_table, t_max=500.0, directory=tmp_path / "b")
    b.extend_to(400.0)
    for kind in ("zeta2", "estar"):
        name = f"{kind}-h{qd._fmt(a.h)}-s64.ckpt"
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
    assert a.state_at(377.7) == b.state_at(377.7)
    mem = QuadratureCheckpointStore(small_table, t_max=500.0)
    mem.extend_to(400.0)
    assert mem.records() == a.records()


def test_torn_record_is_repaired(tmp_path, small_table):
    s = QuadratureCheckpointStore(small_table, t_max=300.0, directory=tmp_path)
    s.extend_to(200.0)
    n = len(s.records())
    path = tmp_path / f"zeta2-h{qd._fmt(s.h)}-s64.ckpt"
    with open(path, "a") as f:
        f.write("208.0\t12")
    r = QuadratureCheckpointStore(small_table, t_max=300.0, directory=tmp_path)
    assert len(r.records()) == n
    assert path.read_text().endswith("\n")


def test_header_mismatch(tmp_path, small_table):
    s = QuadratureCheckpointStore(small_table, t_max=300.0, directory=tmp_path)
    path = tmp_path / f"zeta2-h{qd._fmt(s.h)}-s64.ckpt"
    path.write_text("zmslab-ckpt v0 h=1 kind=zeta2\n")
    with pytest.raises(PersistenceError):
        QuadratureCheckpointStore(small_table, t_max=300.0, directory=tmp_path)


def test_read_only_store(tmp_path, small_table):
    s = QuadratureCheckpointStore(small_table, t_max=300.0, directory=tmp_path)
    s.extend_to(100.0)
    r = QuadratureCheckpointStore(small_table, t_max=300.0, directory=tmp_path, read_only=True)
    assert r.state_at(90.0)[0] == s.state_at(90.0)[0]
    with pytest.raises(PersistenceError):
        r.state_at(250.0)


@pytest.mark.skipif(os.geteuid() == 0, reason="root ignores directory permissions")
def test_unwritable_directory(tmp_path, small_table):
    d = tmp_path / "ro"
    d.mkdir()
    d.chmod(stat.S_IRUSR | stat.S_IXUSR)
    with pytest.raises(PersistenceError):
        QuadratureCheckpointStore(small_table, t_max=300.0, directory=d / "sub")


def test_unwritable_path_is_persistence_error(tmp_path, small_table):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    with pytest.raises(PersistenceError):
        QuadratureCheckpointStore(small_table, t_max=300.0, directory=blocker / "sub")
