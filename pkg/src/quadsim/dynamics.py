"""Quadrotor 6-DOF rigid-body dynamics and fixed-step RK4 integration.

Frames and signs: position/velocity are inertial, angular rate and torque are
body-frame.  Gravity acts along +e_z (z points down), thrust of magnitude
``thrust`` acts along the body -e_z axis.  Inertia is diagonal.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidSchedule, NumericalDivergence
from .quat import quat_kinematics

DIVERGENCE_LIMIT = 1e6


@dataclass
class VehicleParams:
    """Mass (kg), diagonal inertia (kg m^2) and gravity (m/s^2)."""

    m: float
    J: np.ndarray
    g: float = 9.8

    def __post_init__(self):
        self.J = np.asarray(self.J, dtype=float)
        if self.m <= 0.0:
            raise InvalidSchedule(f"mass must be positive, got {self.m}")
        if np.any(self.J <= 0.0):
            raise InvalidSchedule(f"inertia must be positive, got {self.J}")


@dataclass
class RigidBodyState:
    """Position, velocity (inertial), attitude quaternion, body rate."""

    p: np.ndarray
    v: np.ndarray
    q: np.ndarray
    w: np.ndarray

    def __post_init__(self):
        self.p = np.asarray(self.p, dtype=float)
        self.v = np.asarray(self.v, dtype=float)
        self.q = np.asarray(self.q, dtype=float)
        self.w = np.asarray(self.w, dtype=float)

    def as_vector(self) -> np.ndarray:
        return np.concatenate([self.p, self.v, self.q, self.w])

    @classmethod
    def from_vector(cls, x) -> "RigidBodyState":
        x = np.asarray(x, dtype=float)
        return cls(x[0:3], x[3:6], x[6:10], x[10:13])


@dataclass
class ControlOutput:
    """Total thrust magnitude (N) and body torque (N m)."""

    thrust: float
    torque: np.ndarray

    def __post_init__(self):
        self.torque = np.asarray(self.torque, dtype=float)
        if not (self.thrust >= 0.0 and math.isfinite(self.thrust)):
            raise ValueError(f"thrust must be finite and non-negative, got {self.thrust}")


@dataclass
class Perturbation:
    """Additive time profile applied to one parameter of the nominal vehicle.

    kind 'constant' uses `offset`; 'sinusoid' uses amplitude/freq_hz/phase;
    'ramp' ramps at `rate` per second between start and end times.
    """

    target: str  # one of m, J11, J22, J33
    kind: str  # constant | sinusoid | ramp
    offset: float = 0.0
    amplitude: float = 0.0
    freq_hz: float = 0.0
    phase: float = 0.0
    rate: float = 0.0
    start: float = 0.0
    end: float = 0.0

    _TARGETS = ("m", "J11", "J22", "J33")

    def __post_init__(self):
        if self.target not in self._TARGETS:
            raise InvalidSchedule(f"unknown perturbation target {self.target!r}")
        if self.kind not in ("constant", "sinusoid", "ramp"):
            raise InvalidSchedule(f"unknown perturbation kind {self.kind!r}")

    def value(self, t: float) -> float:
        if self.kind == "constant":
            return self.offset
        if self.kind == "sinusoid":
            return self.amplitude * math.sin(2.0 * math.pi * self.freq_hz * t + self.phase)
        # ramp
        return self.rate * min(max(t - self.start, 0.0), self.end - self.start)


@dataclass
class ParamSchedule:
    """Nominal vehicle parameters plus time-varying perturbations."""

    nominal: VehicleParams
    perturbations: list = field(default_factory=list)

    def validate(self, horizon: float, samples: int = 1000) -> None:
        """Check strict positivity of m and J over the horizon by sampling."""
        for t in np.linspace(0.0, horizon, samples + 1):
            params_at(self, float(t))


def params_at(schedule: ParamSchedule, t: float) -> VehicleParams:
    """Vehicle parameters at time t; raises InvalidSchedule when non-positive."""
    m = schedule.nominal.m
    J = schedule.nominal.J.copy()
    for pert in schedule.perturbations:
        dv = pert.value(t)
        if pert.target == "m":
            m += dv
        elif pert.target == "J11":
            J[0] += dv
        elif pert.target == "J22":
            J[1] += dv
        else:
            J[2] += dv
    if m <= 0.0 or J[0] <= 0.0 or J[1] <= 0.0 or J[2] <= 0.0:
        raise InvalidSchedule(f"schedule gives non-positive parameter at t={t}: m={m}, J={J}")
    return VehicleParams(m, J, schedule.nominal.g)


def translational_deriv(state: RigidBodyState, thrust: float, params: VehicleParams):
    """Position/velocity derivatives under thrust along body -e_z plus gravity."""
    q0, q1, q2, q3 = state.q
    u = thrust / params.m
    vdot = np.array(
        [
            -2.0 * u * (q0 * q2 + q1 * q3),
            -2.0 * u * (q2 * q3 - q0 * q1),
            u * (q1 * q1 + q2 * q2 - q0 * q0 - q3 * q3) + params.g,
        ]
    )
    return state.v.copy(), vdot


def rotational_deriv(w, tau, J) -> np.ndarray:
    """Euler's equations for a diagonal inertia: J dw = (J w) x w + tau."""
    w1, w2, w3 = w
    return np.array(
        [
            ((J[1] - J[2]) * w2 * w3 + tau[0]) / J[0],
            ((J[2] - J[0]) * w3 * w1 + tau[1]) / J[1],
            ((J[0] - J[1]) * w1 * w2 + tau[2]) / J[2],
        ]
    )


def state_deriv(state: RigidBodyState, control: ControlOutput, params: VehicleParams) -> np.ndarray:
    """Concatenated 13-dim derivative [dp, dv, dq, dw]."""
    pdot, vdot = translational_deriv(state, control.thrust, params)
    qdot = quat_kinematics(state.q, state.w)
    wdot = rotational_deriv(state.w, control.torque, params.J)
    return np.concatenate([pdot, vdot, qdot, wdot])


def _deriv_vec(x, thrust, tau, m, J, g) -> np.ndarray:
    """Scalar-expanded derivative on a packed state vector (hot path)."""
    q0, q1, q2, q3 = x[6], x[7], x[8], x[9]
    w1, w2, w3 = x[10], x[11], x[12]
    u = thrust / m
    out = np.empty(13)
    out[0] = x[3]
    out[1] = x[4]
    out[2] = x[5]
    out[3] = -2.0 * u * (q0 * q2 + q1 * q3)
    out[4] = -2.0 * u * (q2 * q3 - q0 * q1)
    out[5] = u * (q1 * q1 + q2 * q2 - q0 * q0 - q3 * q3) + g
    out[6] = -0.5 * (q1 * w1 + q2 * w2 + q3 * w3)
    out[7] = 0.5 * (q0 * w1 - q3 * w2 + q2 * w3)
    out[8] = 0.5 * (q3 * w1 + q0 * w2 - q1 * w3)
    out[9] = 0.5 * (-q2 * w1 + q1 * w2 + q0 * w3)
    out[10] = ((J[1] - J[2]) * w2 * w3 + tau[0]) / J[0]
    out[11] = ((J[2] - J[0]) * w3 * w1 + tau[1]) / J[1]
    out[12] = ((J[0] - J[1]) * w1 * w2 + tau[2]) / J[2]
    return out


def step_rk4(
    state: RigidBodyState,
    control: ControlOutput,
    schedule: ParamSchedule,
    t: float,
    dt: float,
) -> RigidBodyState:
    """Classical RK4 step with zero-order-hold control.

    Parameters are sampled at t, t+dt/2 and t+dt for the four stages; the
    quaternion is renormalized after the step.  Raises NumericalDivergence
    when any component exceeds 1e6 in magnitude.
    """
    if not 0.0 < dt <= 0.05:
        raise ValueError(f"dt must lie in (0, 0.05], got {dt}")
    p0 = params_at(schedule, t)
    ph = params_at(schedule, t + 0.5 * dt)
    p1 = params_at(schedule, t + dt)
    thrust, tau = control.thrust, control.torque

    x = state.as_vector()
    k1 = _deriv_vec(x, thrust, tau, p0.m, p0.J, p0.g)
    k2 = _deriv_vec(x + 0.5 * dt * k1, thrust, tau, ph.m, ph.J, ph.g)
    k3 = _deriv_vec(x + 0.5 * dt * k2, thrust, tau, ph.m, ph.J, ph.g)
    k4 = _deriv_vec(x + dt * k3, thrust, tau, p1.m, p1.J, p1.g)
    x_new = x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)

    qn = x_new[6:10]
    x_new[6:10] = qn / math.sqrt(qn @ qn)
    if not np.all(np.isfinite(x_new)) or np.max(np.abs(x_new)) > DIVERGENCE_LIMIT:
        raise NumericalDivergence(f"state left sane range at t={t + dt:.3f}")
    return RigidBodyState.from_vector(x_new)
