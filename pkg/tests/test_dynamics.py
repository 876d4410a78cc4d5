import numpy as np
import pytest

from gazesim.dynamics import (
    Fixation,
    GazeState,
    Scanpath,
    SimConfig,
    Trajectory,
    accel,
    energy,
    extract_fixations,
    simulate,
    simulate_detailed,
    write_trajectory_csv,
)
from gazesim.features import FeatureStack, basic_stack
from gazesim.gravity import GravityParams, mass_from_features
from gazesim.ior import InhibitionMap, IorParams

from conftest import blob_frame, blob_map


def _map_stack(m):
    return FeatureStack(m[None], ("m",), "custom")


def _zero_stack(size=32):
    return _map_stack(np.zeros((size, size)))


class TestAccel:
    def test_rest_equilibrium(self):
        state = GazeState(np.zeros(2), np.zeros(2))
        np.testing.assert_array_equal(accel(state, (0.0, 0.0), 2.0), [0.0, 0.0])

    def test_pure_damping(self):
        state = GazeState(np.zeros(2), np.array([1.0, 0.0]))
        np.testing.assert_array_equal(accel(state, (0.0, 0.0), 2.0), [-2.0, 0.0])

    def test_pure_attraction(self):
        state = GazeState(np.zeros(2), np.zeros(2))
        np.testing.assert_array_equal(accel(state, (0.5, -0.25), 2.0), [0.5, -0.25])


class TestSimulate:
    def test_zero_mass_holds_position(self):
        sc = SimConfig(damping=2.0, duration=1.0, sample_dt=0.02)
        traj = simulate(None, _zero_stack(), GravityParams(), None, sc)
        assert len(traj) == 51
        np.testing.assert_allclose(traj.positions, [[15.5, 15.5]] * 51, atol=1e-9)
        assert traj.times[0] == 0.0

    def test_damped_drift_closed_form(self):
        u, lam = 40.0, 2.0
        sc = SimConfig(damping=lam, duration=1.0, sample_dt=0.02, init_pos=(4.0, 15.0), init_vel=(u, 0.0))
        traj = simulate(None, _zero_stack(64), GravityParams(), None, sc)
        expected = u * np.exp(-lam * traj.times)
        np.testing.assert_allclose(traj.velocities[:, 0], expected, rtol=1e-6)
        np.testing.assert_allclose(traj.velocities[:, 1], 0.0, atol=1e-9)

    def test_single_blob_capture(self):
        # overdamped regime: damping above twice the well frequency
        # (omega = sqrt(gain/2) for a unit-peak Gaussian blob)
        size = 64
        target = np.array([20.0, 16.0])
        ys, xs = np.mgrid[0:size, 0:size]
        mass = np.exp(-(((xs - target[0]) ** 2) + ((ys - target[1]) ** 2)) / (2 * 4.0**2))
        stack = _map_stack(mass)
        sc = SimConfig(damping=70.0, duration=2.5, sample_dt=0.02)
        traj = simulate(None, stack, GravityParams(global_gain=2000.0), None, sc)
        dist = np.hypot(traj.positions[:, 0] - target[0], traj.positions[:, 1] - target[1])
        assert dist[-1] < 2.0
        settle = int(np.argmax(dist))
        assert np.all(np.diff(dist[settle:]) <= 1e-9)

    def test_boundary_confinement(self):
        sc = SimConfig(damping=0.5, duration=1.0, sample_dt=0.02, init_vel=(-500.0, 120.0))
        traj = simulate(None, _zero_stack(), GravityParams(), None, sc)
        assert traj.positions[:, 0].min() >= 0.0
        assert traj.positions[:, 0].max() <= 31.0
        assert traj.positions[:, 1].min() >= 0.0
        assert traj.positions[:, 1].max() <= 31.0
        # gaze parks at the left wall once the outward component is zeroed
        assert traj.positions[-1, 0] == 0.0

    def test_deterministic_repeat(self):
        f = blob_frame(64, [((20, 20), 5.0, 1.0), ((44, 40), 5.0, 0.8)])
        stack = basic_stack(f)
        sc = SimConfig(damping=3.0, duration=0.5, sample_dt=0.02)
        gp = GravityParams(global_gain=2000.0)
        t1 = simulate(f, stack, gp, IorParams(), sc)
        t2 = simulate(f, stack, gp, IorParams(), sc)
        assert np.array_equal(t1.positions, t2.positions)
        assert np.array_equal(t1.velocities, t2.velocities)

    def test_frame_stack_size_mismatch(self):
        f = blob_frame(32, [((10, 10), 3.0, 1.0)])
        with pytest.raises(ValueError):
            simulate(f, _zero_stack(64), GravityParams(), None, SimConfig(damping=1.0, duration=0.1))

    def test_two_blob_exploration(self):
        centers = ((45, 45), (85, 80))
        f = blob_frame(224, [(centers[0], 8.0, 1.0), (centers[1], 8.0, 1.0)])
        stack = basic_stack(f)
        traj = simulate(f, stack, GravityParams(global_gain=5000.0), IorParams(), SimConfig(damping=3.0, duration=3.0))
        for cx, cy in centers:
            assert np.hypot(traj.positions[:, 0] - cx, traj.positions[:, 1] - cy).min() < 10.0

    def test_tolerance_halving_moves_final_position_little(self):
        f = blob_frame(96, [((30, 30), 6.0, 1.0), ((70, 60), 6.0, 0.9)])
        stack = basic_stack(f)
        gp = GravityParams(global_gain=3000.0)
        finals = []
        for fac in (1.0, 0.5):
            sc = SimConfig(damping=3.0, duration=2.0, sample_dt=0.02, rtol=1e-6 * fac, atol=1e-8 * fac)
            finals.append(simulate(f, stack, gp, IorParams(), sc).positions[-1])
        assert np.hypot(*(finals[0] - finals[1])) < 0.5


class TestEnergy:
    def test_zero_state_zero_mass(self):
        from gazesim.gravity import MassField

        state = GazeState(np.array([3.0, 4.0]), np.zeros(2))
        assert energy(state, MassField(np.zeros((8, 8)))) == 0.0

    def test_kinetic_term(self):
        from gazesim.gravity import MassField

        state = GazeState(np.array([1.0, 1.0]), np.array([3.0, 4.0]))
        assert energy(state, MassField(np.zeros((8, 8)))) == pytest.approx(12.5)

    def test_dissipation_along_trajectory(self):
        rng = np.random.default_rng(3)
        m = np.zeros((24, 24))
        m[6:18, 6:18] = rng.random((12, 12))
        stack = _map_stack(m)
        gp = GravityParams(global_gain=10.0)
        mu = mass_from_features(stack, gp, InhibitionMap.zeros(24, 24))
        sc = SimConfig(damping=2.0, duration=1.0, sample_dt=0.02, init_pos=(9.0, 13.0), rtol=1e-9, atol=1e-11)
        res = simulate_detailed(None, stack, gp, None, sc, exact_field=True)
        H = np.array([energy(res.trajectory.state(i), mu) for i in range(len(res.trajectory))])
        assert np.diff(H).max() <= 1e-6


class TestExtractFixations:
    def test_constant_trajectory(self):
        n = 151
        times = np.arange(n) * 0.02
        traj = Trajectory(times, np.full((n, 2), 7.0), np.zeros((n, 2)))
        scan = extract_fixations(traj, vel_threshold=700.0, min_duration=0.08)
        assert len(scan) == 1
        f = scan.fixations[0]
        assert (f.x, f.y) == (7.0, 7.0)
        assert f.t_start == 0.0 and f.t_end == pytest.approx(3.0)

    def test_dwell_jump_dwell(self):
        dt = 0.02
        pos, vel = [], []
        for _ in range(10):  # 200 ms dwell at (10, 10)
            pos.append((10.0, 10.0))
            vel.append((0.0, 0.0))
        for k in range(2):  # 40 ms fast jump
            pos.append((20.0 + 10 * k, 20.0 + 10 * k))
            vel.append((1500.0, 1500.0))
        for _ in range(10):  # 200 ms dwell at (50, 50)
            pos.append((50.0, 50.0))
            vel.append((0.0, 0.0))
        times = np.arange(len(pos)) * dt
        scan = extract_fixations(Trajectory(times, np.array(pos), np.array(vel)), 700.0, 0.08)
        assert len(scan) == 2
        assert (scan.fixations[0].x, scan.fixations[0].y) == (10.0, 10.0)
        assert (scan.fixations[1].x, scan.fixations[1].y) == (50.0, 50.0)

    def test_all_fast_gives_empty(self):
        n = 50
        times = np.arange(n) * 0.02
        vel = np.full((n, 2), 800.0)
        scan = extract_fixations(Trajectory(times, np.zeros((n, 2)), vel), 700.0, 0.08)
        assert len(scan) == 0


class TestTrajectoryCsv:
    def test_round_trip_format(self, tmp_path):
        times = np.array([0.0, 0.02])
        traj = Trajectory(times, np.array([[1.0, 2.0], [3.0, 4.5]]), np.array([[0.0, 0.0], [10.0, -2.25]]))
        path = tmp_path / "traj.csv"
        write_trajectory_csv(traj, path)
        lines = path.read_text().splitlines()
        assert lines[0] == "t,x,y,vx,vy"
        assert lines[1] == "0.000000,1.000000,2.000000,0.000000,0.000000"
        assert lines[2] == "0.020000,3.000000,4.500000,10.000000,-2.250000"


class TestScanpathTypes:
    def test_fixation_interval_validation(self):
        with pytest.raises(ValueError):
            Fixation(0.0, 0.0, 1.0, 0.5)

    def test_scanpath_ordering_validation(self):
        f1 = Fixation(0.0, 0.0, 0.0, 1.0)
        f2 = Fixation(1.0, 1.0, 0.5, 2.0)  # overlaps f1
        with pytest.raises(ValueError):
            Scanpath((f1, f2))

    def test_scanpath_dict_round_trip(self):
        scan = Scanpath((Fixation(1.0, 2.0, 0.0, 0.5), Fixation(3.0, 4.0, 0.6, 1.0)))
        assert Scanpath.from_dicts(scan.to_dicts()) == scan
