import numpy as np
import pytest

from nucleongs.energy import Coupling
from nucleongs.shooting import (BracketError, ShootTrajectory,
                                find_ground_state, integrate_trajectory,
                                verify_system)


def test_overshoot_and_undershoot_classification():
    c = Coupling(8.0, 1.0)
    lo = np.sqrt(1.0 / 8.0) + 1e-6       # barely above sqrt(b/a): undershoot
    assert integrate_trajectory(lo, c).classification == "undershoot"
    assert integrate_trajectory(0.999, c).classification == "overshoot"


def test_invalid_starts_rejected():
    c = Coupling(8.0, 1.0)
    with pytest.raises(ValueError):
        integrate_trajectory(1.5, c)
    with pytest.raises(ValueError):
        integrate_trajectory(-0.1, c)
    with pytest.raises(ValueError):
        find_ground_state(Coupling(8.0))           # b required
    with pytest.raises(BracketError):
        find_ground_state(Coupling(8.0, 5.0))      # a - 2b < 0


def test_ground_candidate_properties():
    traj = find_ground_state(Coupling(8.0, 1.0))
    assert traj.classification == "ground-candidate"
    assert traj.max_g ** 2 < 1.0
    assert traj.tail_norm < 1e-4
    assert traj.g[0] == pytest.approx(traj.g0, abs=1e-5)
    assert np.all(np.diff(traj.g) <= 1e-12)        # monotone decreasing g
    assert traj.bracket[0] <= traj.g0 <= traj.bracket[1]


def test_g0_reproducible_under_tolerance_halving():
    t1 = find_ground_state(Coupling(8.0, 1.0), g0_tol=1e-13)
    t2 = find_ground_state(Coupling(8.0, 1.0), g0_tol=0.5e-13)
    assert abs(t1.g0 - t2.g0) < 1e-6


def test_trajectory_satisfies_ode_system():
    traj = find_ground_state(Coupling(8.0, 1.0))
    check = verify_system(traj, Coupling(8.0, 1.0))
    assert check["residual_f"] < 1e-4
    assert check["residual_g"] < 1e-4


def test_save_csv_roundtrip(tmp_path):
    traj = find_ground_state(Coupling(8.0, 1.0))
    path = tmp_path / "traj.csv"
    traj.save_csv(path)
    data = np.loadtxt(path, delimiter=",", skiprows=1)
    assert data.shape[1] == 3
    np.testing.assert_allclose(data[:, 2], traj.g, rtol=0, atol=1e-15)


def test_as_dict_fields():
    traj = find_ground_state(Coupling(8.0, 1.0))
    d = traj.as_dict(Coupling(8.0, 1.0))
    for key in ("g0", "classification", "r_end", "max_g", "tail_norm"):
        assert key in d
    assert isinstance(traj, ShootTrajectory)
