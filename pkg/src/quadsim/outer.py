"""Translation controller: adaptive backstepping producing thrust and
desired attitude.

The loop runs per axis: position error -> stabilizing virtual velocity ->
velocity error -> commanded specific force F with an adaptive damping
estimate psi_hat.  The commanded force is then converted to a total thrust
magnitude and a zero-yaw desired quaternion whose defining property is the
exact round trip: flying at (Q_d, thrust) reproduces F through the
translational dynamics.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dynamics import RigidBodyState, VehicleParams
from .errors import ExtractionSingular, ThrustTooSmall
from .reference import TrajectorySample

#: Radicand floor for the scalar part of the extracted attitude; below this
#: the commanded tilt is within numerical reach of 180 degrees.
EXTRACTION_EPS = 1e-6

#: Default minimum thrust as a fraction of hover thrust m*g.
MIN_THRUST_FRACTION = 1e-3


@dataclass
class OuterGains:
    """Per-axis position gains theta and adaptation rates eta."""

    theta: np.ndarray
    eta: np.ndarray

    def __post_init__(self):
        self.theta = np.asarray(self.theta, dtype=float)
        self.eta = np.asarray(self.eta, dtype=float)
        if np.any(self.theta <= 0.0) or np.any(self.eta <= 0.0):
            raise ValueError(f"outer gains must be positive: theta={self.theta}, eta={self.eta}")


@dataclass
class AdaptiveOuterState:
    """Adaptive velocity-damping estimates, one per axis, non-decreasing."""

    psi_hat: np.ndarray

    def __post_init__(self):
        self.psi_hat = np.asarray(self.psi_hat, dtype=float)


@dataclass
class OuterOutput:
    """Commanded specific force, thrust magnitude and desired attitude."""

    force: np.ndarray
    thrust: float
    q_d: np.ndarray


def position_error(p, p_d) -> np.ndarray:
    return np.asarray(p, dtype=float) - np.asarray(p_d, dtype=float)


def virtual_velocity(p_err, v_d_traj, gains: OuterGains) -> np.ndarray:
    """Stabilizing velocity command: -theta * p_err + trajectory velocity."""
    return -gains.theta * p_err + np.asarray(v_d_traj, dtype=float)


def virtual_force(p_err, v_err, a_d_traj, psi: AdaptiveOuterState, gains: OuterGains) -> np.ndarray:
    """Commanded specific force: theta^2 p_err - psi_hat v_err + feedforward."""
    return gains.theta**2 * p_err - psi.psi_hat * v_err + np.asarray(a_d_traj, dtype=float)


def update_psi(psi: AdaptiveOuterState, v_err, gains: OuterGains, dt: float) -> AdaptiveOuterState:
    """Explicit-Euler adaptation: psi_hat += eta * v_err^2 * dt (monotone)."""
    if dt <= 0.0:
        raise ValueError(f"dt must be positive, got {dt}")
    return AdaptiveOuterState(psi.psi_hat + gains.eta * np.asarray(v_err) ** 2 * dt)


def thrust_magnitude(force, params: VehicleParams) -> float:
    """Total thrust m * ||(Fx, Fy, Fz - g)||; non-negative by construction."""
    fx, fy, fz = force
    return params.m * math.sqrt(fx * fx + fy * fy + (fz - params.g) ** 2)


def extract_attitude(
    force,
    thrust: float,
    params: VehicleParams,
    min_thrust: float | None = None,
    eps_q: float = EXTRACTION_EPS,
) -> np.ndarray:
    """Zero-yaw desired quaternion realizing the commanded specific force.

        q0d = sqrt(1/2 + m (g - Fz) / (2 thrust))
        q1d = +m Fy / (2 thrust q0d)
        q2d = -m Fx / (2 thrust q0d)
        q3d = 0

    The q1d/q2d signs are fixed by the round-trip requirement that the
    translational dynamics at (Q_d, thrust) reproduce F exactly.  Raises
    ThrustTooSmall below the guard and ExtractionSingular when the q0d
    radicand falls to eps_q (commanded tilt near 180 degrees).
    """
    fx, fy, fz = force
    m, g = params.m, params.g
    if min_thrust is None:
        min_thrust = MIN_THRUST_FRACTION * m * g
    if thrust <= min_thrust:
        raise ThrustTooSmall(f"thrust {thrust:.6g} N at or below guard {min_thrust:.6g} N")
    rad = 0.5 + m * (g - fz) / (2.0 * thrust)
    if rad <= eps_q:
        raise ExtractionSingular(f"q0d radicand {rad:.3e} at or below {eps_q:.1e}")
    q0d = math.sqrt(rad)
    q1d = m * fy / (2.0 * thrust * q0d)
    q2d = -m * fx / (2.0 * thrust * q0d)
    q_d = np.array([q0d, q1d, q2d, 0.0])
    return q_d / math.sqrt(q_d @ q_d)


def outer_step(
    state: RigidBodyState,
    sample: TrajectorySample,
    psi: AdaptiveOuterState,
    gains: OuterGains,
    params: VehicleParams,
    dt: float,
) -> tuple[OuterOutput, AdaptiveOuterState]:
    """One translation-control tick.

    Order: position error, virtual velocity, velocity error, commanded force
    (with the pre-update psi_hat), adaptation, thrust, attitude extraction.
    """
    p_err = position_error(state.p, sample.p_d)
    v_d = virtual_velocity(p_err, sample.v_d, gains)
    v_err = state.v - v_d
    force = virtual_force(p_err, v_err, sample.a_d, psi, gains)
    psi_new = update_psi(psi, v_err, gains, dt)
    thrust = thrust_magnitude(force, params)
    q_d = extract_attitude(force, thrust, params)
    return OuterOutput(force, thrust, q_d), psi_new
