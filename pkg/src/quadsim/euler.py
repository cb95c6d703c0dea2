"""Euler-angle (Z-Y-X) twin of the attitude controller.

Structurally the same sliding-mode design as the quaternion loop, but the
error, surface and commanded acceleration live in roll/pitch/yaw space and
go through the Euler rate matrix, which is singular at pitch = +/-90 deg.
Half-angle scaling keeps the two controllers' torques comparable in the
small-angle regime.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dynamics import RigidBodyState, VehicleParams
from .inner import AdaptiveInnerState, InnerGains, rho, rho_dot, smoothed_sign, update_lambda
from .quat import quat_to_rot

#: |cos(pitch)| below which the kinematic inversion is flagged as unreliable.
GIMBAL_COS_TOL = 1e-3


@dataclass
class EulerAngles:
    """Z-Y-X (yaw-pitch-roll) angles in radians."""

    roll: float
    pitch: float
    yaw: float

    def as_array(self) -> np.ndarray:
        return np.array([self.roll, self.pitch, self.yaw])


def quat_to_euler(q) -> tuple[EulerAngles, bool]:
    """Extract Z-Y-X angles from a unit quaternion.

    Returns (angles, gimbal_flag); the flag is set (not raised) near pitch
    +/-90 deg so a run is allowed to continue into the singular region.
    """
    r = quat_to_rot(q)
    sp = -r[2, 0]
    sp = min(1.0, max(-1.0, sp))
    pitch = math.asin(sp)
    gimbal = abs(math.cos(pitch)) < GIMBAL_COS_TOL
    if gimbal:
        # yaw and roll are indistinguishable here; pin yaw and keep going
        roll = math.atan2(-r[0, 1], r[1, 1])
        yaw = 0.0
    else:
        roll = math.atan2(r[2, 1], r[2, 2])
        yaw = math.atan2(r[1, 0], r[0, 0])
    return EulerAngles(roll, pitch, yaw), gimbal


def euler_rate_matrix(roll: float, pitch: float) -> np.ndarray:
    """Matrix E with [droll, dpitch, dyaw] = E @ omega (body rates)."""
    sphi, cphi = math.sin(roll), math.cos(roll)
    ct = math.cos(pitch)
    tt = math.tan(pitch)
    return np.array(
        [
            [1.0, sphi * tt, cphi * tt],
            [0.0, cphi, -sphi],
            [0.0, sphi / ct, cphi / ct],
        ]
    )


def euler_rate_matrix_deriv(
    roll: float, pitch: float, roll_dot: float, pitch_dot: float
) -> np.ndarray:
    """Analytic time derivative of euler_rate_matrix."""
    sphi, cphi = math.sin(roll), math.cos(roll)
    st, ct = math.sin(pitch), math.cos(pitch)
    tt = st / ct
    sec2 = 1.0 / (ct * ct)
    return np.array(
        [
            [0.0, cphi * tt * roll_dot + sphi * sec2 * pitch_dot,
             -sphi * tt * roll_dot + cphi * sec2 * pitch_dot],
            [0.0, -sphi * roll_dot, -cphi * roll_dot],
            [0.0, (cphi * roll_dot * ct + sphi * st * pitch_dot) * sec2,
             (-sphi * roll_dot * ct + cphi * st * pitch_dot) * sec2],
        ]
    )


def wrap_angle(x: float) -> float:
    """Wrap to (-pi, pi]."""
    return math.atan2(math.sin(x), math.cos(x))


def euler_attitude_controller(
    state: RigidBodyState,
    angles_d: np.ndarray,
    rates_d: np.ndarray,
    accels_d: np.ndarray,
    lam: AdaptiveInnerState,
    gains: InnerGains,
    params: VehicleParams,
    dt: float,
    s_prev,
):
    """Sliding-mode torque on Euler-angle errors.

    Half-angle errors e = wrap(angles - angles_d)/2 track the quaternion
    vector part at small angles, so the same gain set is meaningful.  The
    commanded angular acceleration passes through the inverse rate matrix;
    no guard is applied near the pitch singularity on purpose.

    Returns (torque, new adaptive state, sliding value, branch flags,
    gimbal_flag).
    """
    angles, gimbal = quat_to_euler(state.q)
    eta = angles.as_array()
    e = np.array([wrap_angle(a) for a in (eta - np.asarray(angles_d))]) * 0.5
    E = euler_rate_matrix(angles.roll, angles.pitch)
    eta_dot = E @ state.w
    e_dot = (eta_dot - np.asarray(rates_d)) * 0.5

    r, branch = rho(e, s_prev, gains)
    s = gains.gamma1 * r + 2.0 * e_dot
    phi_term = rho_dot(e, e_dot, branch, gains)
    # mirror the quaternion loop: ds = -J^-1 (mu1 s + lam_hat sign(s))
    e_ddot_cmd = -gains.gamma1 * phi_term - (
        gains.mu1 * s + lam.lam_hat * smoothed_sign(s, gains.phi)
    ) / params.J
    eta_ddot_cmd = np.asarray(accels_d) + e_ddot_cmd
    E_dot = euler_rate_matrix_deriv(angles.roll, angles.pitch, eta_dot[0], eta_dot[1])
    w_dot_cmd = np.linalg.solve(E, eta_ddot_cmd - E_dot @ state.w)
    tau = params.J * w_dot_cmd - np.cross(params.J * state.w, state.w)
    lam_new = update_lambda(lam, s, gains, dt)
    return tau, lam_new, s, branch, gimbal
