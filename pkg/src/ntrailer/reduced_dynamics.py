"""Reduced vector field, energy-surface flow, integration and reconstruction.

The reduced equations of motion for ``(u, omega, alpha_1..alpha_n)`` are

    du/dt     = -(sum_k A_k dR/dalpha_k) u^2 / (2R)
                + Q u omega / (l^2 R) + M a omega^2 / R
    domega/dt = -M a u omega / (J0 + M a^2)
    dalpha_1/dt = omega - u sin(alpha_1) / l
    dalpha_k/dt = u A_k                       (k >= 2)

with the coefficient functions from :mod:`ntrailer.model`.  The kinetic
energy is a first integral; on a positive level set the flow restricts to
an (n+1)-torus with angles ``(beta, alpha)``.

Integration never renormalizes onto the energy surface: energy drift is
recorded for every run and serves as the accuracy signal.  The
torus-restricted flow is exposed separately as the conservative
alternative.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.integrate import solve_ivp
from scipy.interpolate import CubicHermiteSpline

from . import model
from .model import ReducedState, TorusCoords, VehicleParams

__all__ = [
    "IntegratorConfig",
    "Trajectory",
    "TorusTrajectory",
    "reduced_rhs",
    "reduced_vector_field",
    "torus_rhs",
    "torus_vector_field",
    "integrate",
    "integrate_reduced",
    "integrate_torus",
    "reconstruct",
    "nonholonomic_residuals",
    "trajectory_to_csv",
    "write_trajectory_csv",
    "read_trajectory_csv",
]


def reduced_rhs(params: VehicleParams, y: np.ndarray) -> np.ndarray:
    """Right-hand side on raw arrays ``y = (u, omega, alpha...)``."""
    u, w = y[0], y[1]
    alpha = y[2:]
    R = model.coeff_R(params, alpha)
    rot = model.rotational_inertia(params)
    Ma = params.M * params.a
    out = np.empty_like(y)
    if params.n:
        A = model.coeff_A(params, alpha)
        dR = model.coeff_R_grad(params, alpha)
        Q = model.coeff_Q(params, alpha)
        out[0] = (-0.5 * float(A @ dR) * u**2 / R
                  + Q * u * w / (params.l**2 * R) + Ma * w**2 / R)
        out[2] = w + u * A[0]
        out[3:] = u * A[1:]
    else:
        out[0] = Ma * w**2 / R
    out[1] = -Ma * u * w / rot
    return out


def reduced_vector_field(params: VehicleParams, state: ReducedState) -> np.ndarray:
    """Time derivative of ``(u, omega, alpha)`` at a reduced state."""
    return reduced_rhs(params, state.as_array())


def torus_rhs(params: VehicleParams, E: float, z: np.ndarray) -> np.ndarray:
    """Flow of ``(beta, alpha...)`` on the energy level set ``E``."""
    beta = z[0]
    alpha = z[1:]
    R = model.coeff_R(params, alpha)
    rot = model.rotational_inertia(params)
    u = math.sqrt(2.0 * E / R) * math.cos(beta)
    out = np.empty_like(z)
    out[0] = (-params.M * params.a / rot) * math.sqrt(2.0 * E / R) \
        * math.sin(beta)
    if params.n:
        A = model.coeff_A(params, alpha)
        out[1] = math.sqrt(2.0 * E / rot) * math.sin(beta) + u * A[0]
        out[2:] = u * A[1:]
    return out


def torus_vector_field(params: VehicleParams, E: float,
                       coords: TorusCoords) -> np.ndarray:
    """Time derivative of ``(beta, alpha)`` on the level set ``E > 0``."""
    if not E > 0:
        raise ValueError("energy level E must be positive")
    return torus_rhs(params, E, np.concatenate(([coords.beta], coords.alpha)))


@dataclass
class IntegratorConfig:
    """Numerical integration settings.

    ``rk45_adaptive`` is an adaptive embedded Runge-Kutta pair with dense
    output; ``rk4_fixed`` is the deterministic fixed-step baseline.
    """

    method: str = "rk45_adaptive"
    rtol: float = 1e-10
    atol: float = 1e-10
    step: float = 1e-3
    max_steps: int = 10_000_000

    def __post_init__(self) -> None:
        if self.method not in ("rk45_adaptive", "rk4_fixed"):
            raise ValueError(f"unknown integrator method {self.method!r}")
        if self.rtol <= 0 or self.atol <= 0 or self.step <= 0:
            raise ValueError("integrator tolerances and step must be positive")
        if self.max_steps <= 0:
            raise ValueError("max_steps must be positive")


@dataclass
class Trajectory:
    """Sampled solution of the reduced (optionally reconstructed) system.

    ``states`` has one row per sample with columns ``u, omega,
    alpha_1..alpha_n``; ``poses`` (if present) holds ``x, y, theta``.
    ``dense`` is a callable mapping time to the state row and is exact to
    integrator accuracy between samples.
    """

    params: VehicleParams
    times: np.ndarray
    states: np.ndarray
    energy_drift: float
    omega_drift: float | None = None
    poses: np.ndarray | None = None
    dense: Callable[[float], np.ndarray] | None = None
    pose_dense: Callable[[float], np.ndarray] | None = None
    constraint_residual: float | None = None

    def __post_init__(self) -> None:
        if self.times.ndim != 1 or len(self.states) != len(self.times):
            raise ValueError("times and states must have matching lengths")
        if np.any(np.diff(self.times) <= 0):
            raise ValueError("times must be strictly increasing")

    @property
    def n(self) -> int:
        return self.states.shape[1] - 2

    def state_at(self, i: int) -> ReducedState:
        return ReducedState.from_array(self.states[i])


@dataclass
class TorusTrajectory:
    """Sampled solution of the energy-surface flow, columns beta, alpha."""

    params: VehicleParams
    E: float
    times: np.ndarray
    angles: np.ndarray
    dense: Callable[[float], np.ndarray] | None = None


class _Abort(Exception):
    def __init__(self, t_last: float, reason: str):
        self.t_last = t_last
        self.reason = reason
        super().__init__(reason)


def integrate(rhs: Callable[[np.ndarray], np.ndarray], y0, t_span,
              config: IntegratorConfig | None = None, t_eval=None):
    """Integrate an autonomous system ``dy/dt = rhs(y)``.

    Returns ``(times, states, dense)`` where ``dense`` interpolates the
    solution over ``t_span``.  Raises ``RuntimeError`` on a non-finite
    state (reporting the last good time) or when the step budget is
    exhausted.
    """
    config = config or IntegratorConfig()
    t0, t1 = float(t_span[0]), float(t_span[1])
    if not t1 > t0:
        raise ValueError("t_span end must exceed its start")
    y0 = np.asarray(y0, dtype=float)
    if not np.all(np.isfinite(y0)):
        raise ValueError("initial state must be finite")

    if config.method == "rk4_fixed":
        return _integrate_rk4(rhs, y0, t0, t1, config, t_eval)
    return _integrate_rk45(rhs, y0, t0, t1, config, t_eval)


def _integrate_rk45(rhs, y0, t0, t1, config, t_eval):
    budget = {"left": 8 * config.max_steps, "t_last": t0}

    def f(t, y):
        if budget["left"] <= 0:
            raise _Abort(budget["t_last"], "max_steps exceeded")
        budget["left"] -= 1
        out = rhs(y)
        if not np.all(np.isfinite(out)):
            raise _Abort(budget["t_last"], "non-finite state encountered")
        budget["t_last"] = t
        return out

    try:
        sol = solve_ivp(f, (t0, t1), y0, method="RK45", rtol=config.rtol,
                        atol=config.atol, dense_output=True, t_eval=t_eval)
    except _Abort as err:
        raise RuntimeError(
            f"integration aborted at t = {err.t_last:.6g}: {err.reason}"
        ) from err
    if not sol.success:
        raise RuntimeError(f"integration failed: {sol.message}")
    return sol.t, sol.y.T, sol.sol


def _integrate_rk4(rhs, y0, t0, t1, config, t_eval):
    n_steps = max(1, math.ceil((t1 - t0) / config.step))
    if n_steps > config.max_steps:
        raise RuntimeError(
            f"max_steps exceeded: {n_steps} fixed steps requested, "
            f"cap is {config.max_steps}")
    h = (t1 - t0) / n_steps
    times = t0 + h * np.arange(n_steps + 1)
    times[-1] = t1
    ys = np.empty((n_steps + 1, y0.size))
    ys[0] = y0
    y = y0.copy()
    for i in range(n_steps):
        k1 = rhs(y)
        k2 = rhs(y + 0.5 * h * k1)
        k3 = rhs(y + 0.5 * h * k2)
        k4 = rhs(y + h * k3)
        y = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if not np.all(np.isfinite(y)):
            raise RuntimeError(
                f"non-finite state encountered; last good time t = "
                f"{times[i]:.6g}")
        ys[i + 1] = y
    derivs = np.array([rhs(row) for row in ys])
    dense = CubicHermiteSpline(times, ys, derivs, axis=0)
    if t_eval is not None:
        t_eval = np.asarray(t_eval, dtype=float)
        return t_eval, dense(t_eval), dense
    return times, ys, dense


def _drifts(params, states):
    energies = np.array(
        [model.energy(params, ReducedState.from_array(r)) for r in states])
    e0 = energies[0]
    scale = e0 if e0 > 0 else 1.0
    energy_drift = float(np.max(np.abs(energies - e0)) / scale)
    omega_drift = None
    if params.a == 0.0:
        omega_drift = float(np.max(np.abs(states[:, 1] - states[0, 1])))
    return energy_drift, omega_drift


def integrate_reduced(params: VehicleParams, initial: ReducedState, t_span,
                      config: IntegratorConfig | None = None,
                      t_eval=None) -> Trajectory:
    """Integrate the reduced system and record conservation drift."""
    times, states, dense = integrate(lambda y: reduced_rhs(params, y),
                                     initial.as_array(), t_span, config,
                                     t_eval)
    energy_drift, omega_drift = _drifts(params, states)
    return Trajectory(params=params, times=times, states=states,
                      energy_drift=energy_drift, omega_drift=omega_drift,
                      dense=dense)


def integrate_torus(params: VehicleParams, E: float, initial: TorusCoords,
                    t_span, config: IntegratorConfig | None = None,
                    t_eval=None) -> TorusTrajectory:
    """Integrate the energy-surface flow in ``(beta, alpha)`` angles."""
    if not E > 0:
        raise ValueError("energy level E must be positive")
    z0 = np.concatenate(([initial.beta], initial.alpha))
    times, angles, dense = integrate(lambda z: torus_rhs(params, E, z),
                                     z0, t_span, config, t_eval)
    return TorusTrajectory(params=params, E=E, times=times, angles=angles,
                           dense=dense)


def reconstruct(params: VehicleParams, traj: Trajectory,
                initial_pose=(0.0, 0.0, 0.0),
                config: IntegratorConfig | None = None) -> Trajectory:
    """Recover the planar motion of the leading car along a reduced run.

    Integrates ``dx/dt = u cos(theta)``, ``dy/dt = u sin(theta)``,
    ``dtheta/dt = omega`` against the trajectory's dense interpolant and
    reports the largest no-slip constraint violation of the reconstructed
    path (measured by differentiating the body positions numerically).
    """
    if traj.dense is None:
        raise ValueError("trajectory carries no dense interpolant")
    config = config or IntegratorConfig(rtol=1e-12, atol=1e-12)

    def pose_rhs(t, p):
        y = traj.dense(t)
        return [y[0] * math.cos(p[2]), y[0] * math.sin(p[2]), y[1]]

    sol = solve_ivp(pose_rhs, (traj.times[0], traj.times[-1]),
                    np.asarray(initial_pose, dtype=float), method="RK45",
                    rtol=config.rtol, atol=config.atol, dense_output=True,
                    t_eval=traj.times)
    if not sol.success:
        raise RuntimeError(f"pose reconstruction failed: {sol.message}")
    poses = sol.y.T
    out = Trajectory(params=params, times=traj.times, states=traj.states,
                     energy_drift=traj.energy_drift,
                     omega_drift=traj.omega_drift, poses=poses,
                     dense=traj.dense, pose_dense=sol.sol)
    res = nonholonomic_residuals(params, out)
    out.constraint_residual = float(np.max(np.abs(res))) if res.size else 0.0
    return out


def _body_positions(params, state_row, pose_row):
    fs = model.FullState(x=pose_row[0], y=pose_row[1], theta=pose_row[2],
                         alpha=state_row[2:])
    pts = np.empty((params.n + 1, 2))
    pts[0] = pose_row[0], pose_row[1]
    if params.n:
        pts[1:] = model.trailer_positions(params, fs)
    return pts


def nonholonomic_residuals(params: VehicleParams,
                           traj: Trajectory) -> np.ndarray:
    """No-slip residual of every body along a reconstructed trajectory.

    The axle velocity of each body is obtained by differentiating its
    reconstructed position with a fourth-order stencil on the dense
    interpolants, so the residual measures the consistency of the numerical
    path itself, not an algebraic identity.  Shape ``(n_times, n + 1)``.
    """
    if traj.poses is None or traj.pose_dense is None:
        raise ValueError("trajectory has no reconstructed poses")
    t0, t1 = traj.times[0], traj.times[-1]
    delta = min(max(1e-3, 1e-6 * (t1 - t0)), 0.125 * (t1 - t0))
    ts = traj.times[(traj.times >= t0 + 2 * delta)
                    & (traj.times <= t1 - 2 * delta)]
    if ts.size == 0:
        ts = np.array([0.5 * (t0 + t1)])
    res = np.empty((ts.size, params.n + 1))
    for i, t in enumerate(ts):
        stencil = [traj.dense(t + k * delta) for k in (-2, -1, 1, 2)]
        pose_st = [traj.pose_dense(t + k * delta) for k in (-2, -1, 1, 2)]
        pts = [_body_positions(params, s, p)
               for s, p in zip(stencil, pose_st)]
        vel = (pts[0] - 8.0 * pts[1] + 8.0 * pts[2] - pts[3]) / (12.0 * delta)
        y = traj.dense(t)
        p = traj.pose_dense(t)
        headings = np.concatenate(
            ([p[2]], p[2] - np.cumsum(y[2:]))) if params.n else np.array([p[2]])
        res[i] = (vel[:, 0] * np.sin(headings)
                  - vel[:, 1] * np.cos(headings))
    return res


def _fmt(value: float) -> str:
    return "%.17g" % value


def trajectory_to_csv(traj: Trajectory) -> str:
    """Serialize a trajectory; full double precision, deterministic bytes."""
    n = traj.n
    cols = ["t", "u", "omega"] + [f"alpha{i}" for i in range(1, n + 1)]
    if traj.poses is not None:
        cols += ["x", "y", "theta"]
    buf = io.StringIO()
    buf.write(",".join(cols) + "\n")
    for i, t in enumerate(traj.times):
        row = [t, *traj.states[i]]
        if traj.poses is not None:
            row.extend(traj.poses[i])
        buf.write(",".join(_fmt(v) for v in row) + "\n")
    return buf.getvalue()


def write_trajectory_csv(traj: Trajectory, path) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(trajectory_to_csv(traj))


def read_trajectory_csv(path) -> tuple[list[str], np.ndarray]:
    """Read back a trajectory CSV as (column names, data matrix)."""
    with open(path) as fh:
        header = fh.readline().strip().split(",")
        data = np.loadtxt(fh, delimiter=",", ndmin=2)
    return header, data
