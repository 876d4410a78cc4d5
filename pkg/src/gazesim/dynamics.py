"""Gaze trajectory integration and fixation extraction.

The focus of attention obeys a damped second-order law: acceleration is
the attraction field at the current position minus a velocity-
proportional damping term. The 4-dimensional first-order system is
integrated with an adaptive embedded Runge-Kutta 4(5) pair; the field is
rebuilt (with the inhibition advanced) at every sample boundary and held
fixed in between.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import partial

import numpy as np
from scipy.integrate import solve_ivp

from .errors import NumericError
from .features import FeatureStack
from .gravity import (
    GravityParams,
    MassField,
    field_at_point,
    field_grid,
    field_interp,
    log_potential,
    mass_from_features,
)
from .imaging import Frame, GrayMap
from .ior import InhibitionMap, IorParams, ior_step

# Produced by the `tune` grid search (NSS objective on the seeded synthetic
# blob corpus, scripts/synthetic_corpus.py); shipped as the package defaults.
DEFAULT_DAMPING = 0.5  # lambda, 1/s
DEFAULT_GLOBAL_GAIN = 1000.0

DEFAULT_VEL_THRESHOLD = 700.0  # px/s, I-VT split between dwell and saccade
DEFAULT_MIN_FIX_DURATION = 0.08  # s


@dataclass(frozen=True)
class GazeState:
    """Continuous gaze state: position a (px) and velocity v (px/s)."""

    a: np.ndarray
    v: np.ndarray

    def __post_init__(self):
        if np.shape(self.a) != (2,) or np.shape(self.v) != (2,):
            raise ValueError("state components must be 2-vectors")
        if not (np.isfinite(self.a).all() and np.isfinite(self.v).all()):
            raise ValueError("state contains non-finite values")


@dataclass(frozen=True)
class SimConfig:
    damping: float = DEFAULT_DAMPING  # 1/s
    duration: float = 3.0  # s
    sample_dt: float = 0.02  # s; output cadence = inhibition/field refresh cadence
    init_pos: tuple[float, float] | None = None  # None: image center
    init_vel: tuple[float, float] = (0.0, 0.0)
    rtol: float = 1e-6
    atol: float = 1e-8
    rng_seed: int = 0  # reserved; the dynamics are deterministic

    def __post_init__(self):
        if self.damping <= 0:
            raise ValueError(f"damping must be positive, got {self.damping}")
        if not 0 < self.sample_dt <= self.duration:
            raise ValueError(f"need 0 < sample_dt <= duration, got {self.sample_dt} vs {self.duration}")
        if self.rtol <= 0 or self.atol <= 0:
            raise ValueError("integrator tolerances must be positive")


@dataclass(frozen=True)
class Trajectory:
    """Sampled gaze path at sample_dt cadence, starting at t = 0."""

    times: np.ndarray  # (N,)
    positions: np.ndarray  # (N, 2)
    velocities: np.ndarray  # (N, 2)

    def __post_init__(self):
        n = self.times.shape[0]
        if self.positions.shape != (n, 2) or self.velocities.shape != (n, 2):
            raise ValueError("trajectory arrays have inconsistent shapes")
        if n == 0:
            raise ValueError("trajectory must contain at least one sample")
        if n > 1 and not (np.diff(self.times) > 0).all():
            raise ValueError("trajectory times must be strictly increasing")

    def __len__(self) -> int:
        return self.times.shape[0]

    def state(self, i: int) -> GazeState:
        return GazeState(self.positions[i].copy(), self.velocities[i].copy())


@dataclass(frozen=True)
class Fixation:
    x: float
    y: float
    t_start: float
    t_end: float

    def __post_init__(self):
        if not self.t_end > self.t_start >= 0:
            raise ValueError(f"need t_end > t_start >= 0, got [{self.t_start}, {self.t_end}]")


@dataclass(frozen=True)
class Scanpath:
    """Time-ordered fixation sequence."""

    fixations: tuple[Fixation, ...]

    def __post_init__(self):
        for prev, cur in zip(self.fixations, self.fixations[1:]):
            if cur.t_start < prev.t_end:
                raise ValueError("fixation intervals must be increasing and non-overlapping")

    def __len__(self) -> int:
        return len(self.fixations)

    def positions(self) -> np.ndarray:
        return np.array([[f.x, f.y] for f in self.fixations]).reshape(len(self.fixations), 2)

    def to_dicts(self) -> list[dict]:
        return [{"x": f.x, "y": f.y, "t_start": f.t_start, "t_end": f.t_end} for f in self.fixations]

    @classmethod
    def from_dicts(cls, rows: list[dict]) -> "Scanpath":
        return cls(tuple(Fixation(r["x"], r["y"], r["t_start"], r["t_end"]) for r in rows))


@dataclass(frozen=True)
class SimResult:
    trajectory: Trajectory
    mean_mass: GrayMap  # time-average of the inhibited mass over the run
    inhibition: InhibitionMap  # final inhibition field


def accel(state: GazeState, field_vec, damping: float) -> np.ndarray:
    """Acceleration: attraction at the focus minus velocity damping."""
    return np.asarray(field_vec, dtype=float) - damping * state.v


def _apply_boundary(pos: np.ndarray, vel: np.ndarray, width: int, height: int) -> None:
    # Clamp to the retina rectangle, zeroing the outward velocity component.
    for axis, limit in ((0, width - 1.0), (1, height - 1.0)):
        if pos[axis] <= 0.0:
            pos[axis] = 0.0
            vel[axis] = max(vel[axis], 0.0)
        elif pos[axis] >= limit:
            pos[axis] = limit
            vel[axis] = min(vel[axis], 0.0)


def _advance(field_fn, y0: np.ndarray, t0: float, t1: float, cfg: SimConfig) -> np.ndarray:
    damping = cfg.damping

    def rhs(_t, y):
        e = field_fn(y[:2])
        return np.array([y[2], y[3], e[0] - damping * y[2], e[1] - damping * y[3]])

    sol = solve_ivp(rhs, (t0, t1), y0, method="RK45", rtol=cfg.rtol, atol=cfg.atol)
    if not sol.success:
        raise NumericError(f"trajectory integration failed at t={sol.t[-1]:.4f}s: {sol.message}")
    return sol.y[:, -1]


def simulate_detailed(
    frame: Frame | None,
    stack: FeatureStack,
    gravity_params: GravityParams,
    ior_params: IorParams | None,
    sim_config: SimConfig,
    exact_field: bool = False,
) -> SimResult:
    """Run the full coupled simulation; ior_params=None disables inhibition.

    exact_field=True evaluates the field by direct summation at the gaze
    position instead of interpolating the precomputed grid. Much slower;
    meant for test instrumentation (the direct field is the exact negative
    gradient of the log-potential, so energy accounting is clean).
    """
    h, w = stack.height, stack.width
    if frame is not None and (frame.height, frame.width) != (h, w):
        raise ValueError(f"frame {frame.width}x{frame.height} does not match feature maps {w}x{h}")

    dt = sim_config.sample_dt
    n_steps = max(1, int(round(sim_config.duration / dt)))
    pos = np.array(sim_config.init_pos if sim_config.init_pos is not None else ((w - 1) / 2.0, (h - 1) / 2.0))
    vel = np.array(sim_config.init_vel, dtype=float)
    _apply_boundary(pos, vel, w, h)

    times = np.empty(n_steps + 1)
    positions = np.empty((n_steps + 1, 2))
    velocities = np.empty((n_steps + 1, 2))
    inhibition = InhibitionMap.zeros(h, w)
    mass_acc = np.zeros((h, w))

    for k in range(n_steps):
        t = k * dt
        times[k] = t
        positions[k] = pos
        velocities[k] = vel

        if ior_params is not None:
            inhibition = ior_step(inhibition, pos, dt, ior_params)
        mu = mass_from_features(stack, gravity_params, inhibition)
        mass_acc += mu.values
        if exact_field:
            field_fn = partial(field_at_point, mu)
        else:
            field_fn = partial(field_interp, field_grid(mu))

        y = _advance(field_fn, np.concatenate([pos, vel]), t, t + dt, sim_config)
        pos, vel = y[:2].copy(), y[2:].copy()
        _apply_boundary(pos, vel, w, h)

    times[n_steps] = n_steps * dt
    positions[n_steps] = pos
    velocities[n_steps] = vel

    traj = Trajectory(times, positions, velocities)
    return SimResult(traj, mass_acc / n_steps, inhibition)


def simulate(
    frame: Frame | None,
    stack: FeatureStack,
    gravity_params: GravityParams,
    ior_params: IorParams | None,
    sim_config: SimConfig,
) -> Trajectory:
    """Integrate the gaze equation over the frame; see simulate_detailed."""
    return simulate_detailed(frame, stack, gravity_params, ior_params, sim_config).trajectory


def energy(state: GazeState, mu: MassField) -> float:
    """H = kinetic + log-potential; non-increasing along trajectories when
    the mass is static (dissipation rate is damping * |v|^2)."""
    return 0.5 * float(state.v @ state.v) + log_potential(mu, state.a)


def extract_fixations(
    traj: Trajectory,
    vel_threshold: float = DEFAULT_VEL_THRESHOLD,
    min_duration: float = DEFAULT_MIN_FIX_DURATION,
) -> Scanpath:
    """I-VT fixation detection: contiguous samples slower than vel_threshold
    become a fixation if they span at least min_duration; the fixation sits
    at the centroid of its samples."""
    speeds = np.hypot(traj.velocities[:, 0], traj.velocities[:, 1])
    below = speeds < vel_threshold

    fixations = []
    i = 0
    n = len(traj)
    while i < n:
        if not below[i]:
            i += 1
            continue
        j = i
        while j + 1 < n and below[j + 1]:
            j += 1
        t_start, t_end = traj.times[i], traj.times[j]
        if t_end - t_start >= min_duration:
            cx, cy = traj.positions[i : j + 1].mean(axis=0)
            fixations.append(Fixation(float(cx), float(cy), float(t_start), float(t_end)))
        i = j + 1
    return Scanpath(tuple(fixations))


def write_trajectory_csv(traj: Trajectory, path) -> None:
    """Write samples as `t,x,y,vx,vy` rows with 6 decimal places."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("t,x,y,vx,vy\n")
        for t, (x, y), (vx, vy) in zip(traj.times, traj.positions, traj.velocities):
            fh.write(f"{t:.6f},{x:.6f},{y:.6f},{vx:.6f},{vy:.6f}\n")
