"""Desired trajectories and attitude-reference derivation.

Trajectory families give analytic position, velocity and acceleration that
stay bounded and twice continuously differentiable.  The attitude half turns
a desired-quaternion stream into body angular velocity and acceleration via
finite differences and the inverse quaternion kinematic map.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import NonTangentInput, ScenarioError
from .quat import quat_conj, quat_mul

_TANGENT_TOL = 1e-6


@dataclass
class TrajectorySample:
    t: float
    p_d: np.ndarray
    v_d: np.ndarray
    a_d: np.ndarray


@dataclass
class AttitudeReference:
    """Desired attitude with body angular velocity and acceleration."""

    q_d: np.ndarray
    w_d: np.ndarray
    w_dot_d: np.ndarray


class Trajectory:
    """Base class; subclasses provide analytic p_d and its two derivatives."""

    def sample(self, t: float) -> TrajectorySample:
        raise NotImplementedError


class HoverTrajectory(Trajectory):
    def __init__(self, point, offset=(0.0, 0.0, 0.0)):
        self.point = np.asarray(point, dtype=float) + np.asarray(offset, dtype=float)

    def sample(self, t: float) -> TrajectorySample:
        z = np.zeros(3)
        return TrajectorySample(t, self.point.copy(), z, z.copy())


class HelixTrajectory(Trajectory):
    """Circle of given radius at angular_rate, climbing at climb_rate (-z up)."""

    def __init__(self, radius, angular_rate, climb_rate, offset=(0.0, 0.0, 0.0)):
        self.r = float(radius)
        self.om = float(angular_rate)
        self.c = float(climb_rate)
        self.offset = np.asarray(offset, dtype=float)

    def sample(self, t: float) -> TrajectorySample:
        r, om, c = self.r, self.om, self.c
        co, si = math.cos(om * t), math.sin(om * t)
        p = self.offset + np.array([r * co, r * si, -c * t])
        v = np.array([-r * om * si, r * om * co, -c])
        a = np.array([-r * om * om * co, -r * om * om * si, 0.0])
        return TrajectorySample(t, p, v, a)


class LissajousTrajectory(Trajectory):
    """Per-axis sinusoids: amp_i * sin(2 pi freq_i t + phase_i)."""

    def __init__(self, amplitudes, freqs_hz, phases=(0.0, 0.0, 0.0), offset=(0.0, 0.0, 0.0)):
        self.amp = np.asarray(amplitudes, dtype=float)
        self.om = 2.0 * math.pi * np.asarray(freqs_hz, dtype=float)
        self.phase = np.asarray(phases, dtype=float)
        self.offset = np.asarray(offset, dtype=float)

    def sample(self, t: float) -> TrajectorySample:
        arg = self.om * t + self.phase
        p = self.offset + self.amp * np.sin(arg)
        v = self.amp * self.om * np.cos(arg)
        a = -self.amp * self.om * self.om * np.sin(arg)
        return TrajectorySample(t, p, v, a)


def _quintic(s: float):
    """Min-jerk profile on [0,1] with zero boundary velocity/acceleration."""
    b = 10.0 * s**3 - 15.0 * s**4 + 6.0 * s**5
    db = 30.0 * s**2 - 60.0 * s**3 + 30.0 * s**4
    ddb = 60.0 * s - 180.0 * s**2 + 120.0 * s**3
    return b, db, ddb


class WaypointTrajectory(Trajectory):
    """Rest-to-rest quintic segments between waypoints, one per segment_time.

    The trajectory holds the last waypoint after the final segment.  C^2
    everywhere because each segment starts and ends with zero velocity and
    acceleration.
    """

    def __init__(self, points, segment_time, offset=(0.0, 0.0, 0.0)):
        pts = [np.asarray(p, dtype=float) + np.asarray(offset, dtype=float) for p in points]
        if len(pts) < 1:
            raise ScenarioError("waypoint trajectory needs at least one point")
        if segment_time <= 0.0:
            raise ScenarioError(f"segment_time must be positive, got {segment_time}")
        self.points = pts
        self.T = float(segment_time)

    def sample(self, t: float) -> TrajectorySample:
        n_seg = len(self.points) - 1
        z = np.zeros(3)
        if n_seg == 0 or t >= n_seg * self.T:
            return TrajectorySample(t, self.points[-1].copy(), z, z.copy())
        i = min(int(t // self.T), n_seg - 1)
        s = (t - i * self.T) / self.T
        a, b = self.points[i], self.points[i + 1]
        d = b - a
        f, df, ddf = _quintic(s)
        return TrajectorySample(t, a + d * f, d * df / self.T, d * ddf / self.T**2)


_TRAJECTORY_KINDS = {
    "hover": HoverTrajectory,
    "helix": HelixTrajectory,
    "lissajous": LissajousTrajectory,
    "waypoints": WaypointTrajectory,
}


def make_trajectory(kind: str, **params) -> Trajectory:
    if kind not in _TRAJECTORY_KINDS:
        raise ScenarioError(f"unknown trajectory kind {kind!r}; know {sorted(_TRAJECTORY_KINDS)}")
    try:
        return _TRAJECTORY_KINDS[kind](**params)
    except TypeError as exc:
        raise ScenarioError(f"bad parameters for trajectory {kind!r}: {exc}") from exc


def desired_omega(q_d, qd_dot) -> np.ndarray:
    """Body angular velocity reproducing the quaternion rate qd_dot.

    Inverts dq = 1/2 q * (0, w):  w = 2 vec(conj(q_d) * qd_dot).  The input
    rate must be tangent (q_d . qd_dot ~ 0), otherwise NonTangentInput.
    """
    q_d = np.asarray(q_d, dtype=float)
    qd_dot = np.asarray(qd_dot, dtype=float)
    if abs(q_d @ qd_dot) > _TANGENT_TOL:
        raise NonTangentInput(f"q_d . qd_dot = {q_d @ qd_dot:.3e} exceeds {_TANGENT_TOL}")
    c = quat_conj(q_d)
    # unnormalized Hamilton product; qd_dot is not a unit quaternion
    w = 2.0 * np.array(
        [
            c[0] * qd_dot[1] + qd_dot[0] * c[1] + c[2] * qd_dot[3] - c[3] * qd_dot[2],
            c[0] * qd_dot[2] + qd_dot[0] * c[2] + c[3] * qd_dot[1] - c[1] * qd_dot[3],
            c[0] * qd_dot[3] + qd_dot[0] * c[3] + c[1] * qd_dot[2] - c[2] * qd_dot[1],
        ]
    )
    return w


def _aligned(q, q_ref) -> np.ndarray:
    """Flip q so it lies in the same hemisphere as q_ref."""
    return -q if (q @ q_ref) < 0.0 else q


def _omega_between(q_a, q_b, h: float) -> np.ndarray:
    """Mean body rate taking q_a to q_b over h seconds (small-step estimate)."""
    rel = quat_mul(quat_conj(q_a), _aligned(np.asarray(q_b, float), np.asarray(q_a, float)))
    return 2.0 * rel[1:4] / h


def attitude_reference_stream(qd_fn, t: float, h: float) -> AttitudeReference:
    """Attitude reference from a desired-quaternion function of time.

    Central finite differences with hemisphere-aligned sampling; h must lie
    in [1e-5, 1e-3] for the stated accuracy.
    """
    if not 1e-5 <= h <= 1e-3:
        raise ValueError(f"h must lie in [1e-5, 1e-3], got {h}")
    q0 = np.asarray(qd_fn(t), dtype=float)
    qm = _aligned(np.asarray(qd_fn(t - h), dtype=float), q0)
    qp = _aligned(np.asarray(qd_fn(t + h), dtype=float), q0)
    w_minus = _omega_between(qm, q0, h)
    w_plus = _omega_between(q0, qp, h)
    return AttitudeReference(
        q_d=q0,
        w_d=0.5 * (w_minus + w_plus),
        w_dot_d=(w_plus - w_minus) / h,
    )


class QdDifferentiator:
    """Streaming backward-difference version for the scenario cascade.

    Fed one desired quaternion per control tick (spacing h); returns the
    current reference with rate/acceleration estimated from the last three
    hemisphere-aligned samples.  Returns zero rates until enough history.
    """

    def __init__(self, h: float):
        if h <= 0.0:
            raise ValueError(f"tick spacing must be positive, got {h}")
        self.h = h
        self._q_prev = None
        self._w_prev = None

    def push(self, q_d) -> AttitudeReference:
        q_d = np.asarray(q_d, dtype=float)
        if self._q_prev is not None:
            q_d = _aligned(q_d, self._q_prev)
        if self._q_prev is None:
            ref = AttitudeReference(q_d, np.zeros(3), np.zeros(3))
        else:
            w = _omega_between(self._q_prev, q_d, self.h)
            if self._w_prev is None:
                ref = AttitudeReference(q_d, w, np.zeros(3))
            else:
                ref = AttitudeReference(q_d, w, (w - self._w_prev) / self.h)
            self._w_prev = w
        self._q_prev = q_d
        return ref
