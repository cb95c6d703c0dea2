"""Attitude controller: adaptive sliding mode on a non-singular surface.

The sliding variable is s = gamma1 * rho(q_err) + w_err where rho is a
piecewise fractional power that switches to a linear branch for small error
components while off the surface, keeping the surface time-derivative (and
hence the torque) bounded as the error crosses zero.  The switching gain is
adapted online and the sign function is smoothed with a boundary layer.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dynamics import RigidBodyState, VehicleParams
from .quat import quat_error, quat_to_rot
from .reference import AttitudeReference

#: Norm threshold below which the previous sliding value counts as zero for
#: the branch selection.
SURFACE_ZERO_TOL = 1e-9

BRANCH_POWER = 0
BRANCH_LINEAR = 1


@dataclass
class InnerGains:
    """Surface gain, fractional exponent c1/c2, branch threshold, reaching
    gain, adaptation rate and boundary-layer width."""

    gamma1: float = 10.0
    c1: int = 3
    c2: int = 5
    eps: float = 0.01
    mu1: float = 2.0
    lam: float = 0.5
    phi: float = 0.01
    derivative_variant: str = "consistent"  # or "literal"

    def __post_init__(self):
        if not (self.gamma1 > 0.0 and self.mu1 > 0.0 and self.lam > 0.0):
            raise ValueError("gamma1, mu1 and lam must be positive")
        if not (self.c1 > 0 and self.c2 > 0 and 0.0 < self.c1 / self.c2 < 1.0):
            raise ValueError(f"need positive c1, c2 with c1/c2 in (0,1); got {self.c1}/{self.c2}")
        if self.eps <= 0.0 or self.phi < 0.0:
            raise ValueError("eps must be positive and phi non-negative")
        if self.derivative_variant not in ("consistent", "literal"):
            raise ValueError(f"unknown derivative_variant {self.derivative_variant!r}")

    @property
    def alpha(self) -> float:
        return self.c1 / self.c2


@dataclass
class AdaptiveInnerState:
    """Adaptive switching gains; all three share one increment."""

    lam_hat: np.ndarray

    def __post_init__(self):
        self.lam_hat = np.asarray(self.lam_hat, dtype=float)


@dataclass
class SlidingState:
    """Sliding value and per-component branch flags (0 power, 1 linear)."""

    s: np.ndarray
    branch: np.ndarray


def omega_error(w, r_tilde, w_d) -> np.ndarray:
    """Rate error w - R_tilde w_d with the desired rate mapped into the body frame."""
    return np.asarray(w, dtype=float) - np.asarray(r_tilde) @ np.asarray(w_d, dtype=float)


def error_rotation(q_err) -> np.ndarray:
    """Matrix taking desired-body vectors into the actual body frame."""
    return quat_to_rot(q_err).T


def _frac_pow(x: float, alpha: float) -> float:
    """Odd (sign-magnitude) fractional power."""
    return math.copysign(abs(x) ** alpha, x)


def rho(q_err_vec, s_prev, gains: InnerGains):
    """Piecewise surface map and branch flags.

    Power branch sign(x)|x|^(c1/c2) applies when the previous sliding value
    is (numerically) zero or the component magnitude exceeds eps; otherwise
    the linear branch returns the component unchanged.
    """
    q_err_vec = np.asarray(q_err_vec, dtype=float)
    s_prev = np.asarray(s_prev, dtype=float)
    on_surface = math.sqrt(s_prev @ s_prev) <= SURFACE_ZERO_TOL
    out = np.empty(3)
    branch = np.empty(3, dtype=int)
    for i in range(3):
        if on_surface or abs(q_err_vec[i]) > gains.eps:
            out[i] = _frac_pow(q_err_vec[i], gains.alpha)
            branch[i] = BRANCH_POWER
        else:
            out[i] = q_err_vec[i]
            branch[i] = BRANCH_LINEAR
    return out, branch


def rho_dot(q_err_vec, q_err_vec_dot, branch, gains: InnerGains) -> np.ndarray:
    """Branch-consistent time derivative of rho.

    Power branch: (c1/c2) |x|^(c1/c2 - 1) dx, linear branch: dx.  The
    'literal' variant instead returns (c1/c2) * x * dx on every component
    (kept selectable for comparison runs; it is not the derivative of rho).
    """
    q_err_vec = np.asarray(q_err_vec, dtype=float)
    dq = np.asarray(q_err_vec_dot, dtype=float)
    if gains.derivative_variant == "literal":
        return gains.alpha * q_err_vec * dq
    out = np.empty(3)
    for i in range(3):
        if branch[i] == BRANCH_LINEAR:
            out[i] = dq[i]
        else:
            base = max(abs(q_err_vec[i]), 1e-12)
            out[i] = gains.alpha * base ** (gains.alpha - 1.0) * dq[i]
    return out


def sliding_surface(q_err_vec, w_err, gains: InnerGains, s_prev) -> SlidingState:
    """Non-singular sliding value s = gamma1 rho(q_err) + w_err."""
    r, branch = rho(q_err_vec, s_prev, gains)
    return SlidingState(gains.gamma1 * r + np.asarray(w_err, dtype=float), branch)


def linear_surface(q_err_vec, w_err, gains: InnerGains) -> np.ndarray:
    """Plain linear sliding value, exposed for diagnostics."""
    return gains.gamma1 * np.asarray(q_err_vec, dtype=float) + np.asarray(w_err, dtype=float)


def smoothed_sign(s, phi: float) -> np.ndarray:
    """sign(s) for phi == 0, otherwise saturation sat(s/phi) in [-1, 1]."""
    if phi < 0.0:
        raise ValueError(f"phi must be non-negative, got {phi}")
    s = np.asarray(s, dtype=float)
    if phi == 0.0:
        return np.sign(s)
    return np.clip(s / phi, -1.0, 1.0)


def update_lambda(lam: AdaptiveInnerState, s, gains: InnerGains, dt: float) -> AdaptiveInnerState:
    """Explicit-Euler adaptation: every component grows by lam * ||s|| * dt."""
    if dt <= 0.0:
        raise ValueError(f"dt must be positive, got {dt}")
    s = np.asarray(s, dtype=float)
    return AdaptiveInnerState(lam.lam_hat + gains.lam * math.sqrt(s @ s) * dt)


def torque_control(
    w,
    r_tilde,
    w_d,
    w_dot_d,
    sliding: SlidingState,
    q_err_vec,
    q_err_vec_dot,
    lam: AdaptiveInnerState,
    gains: InnerGains,
    params: VehicleParams,
) -> np.ndarray:
    """Sliding-mode torque.

    Feedforward cancels the relative-rate and gyroscopic terms, the surface
    derivative term steers gamma1 rho(q_err), and the reaching law is
    -mu1 s - lam_hat (.) smoothed_sign(s).  The closed surface dynamics are
    ds = -J^-1 (mu1 s + lam_hat sign(s)).
    """
    J = params.J
    w = np.asarray(w, dtype=float)
    rw_d = np.asarray(r_tilde) @ np.asarray(w_d, dtype=float)
    w_err = w - rw_d
    ff = np.cross(w_err, rw_d) - np.asarray(r_tilde) @ np.asarray(w_dot_d, dtype=float)
    phi_term = rho_dot(q_err_vec, q_err_vec_dot, sliding.branch, gains)
    return (
        -J * ff
        - np.cross(J * w, w)
        - J * (gains.gamma1 * phi_term)
        - gains.mu1 * sliding.s
        - lam.lam_hat * smoothed_sign(sliding.s, gains.phi)
    )


def attitude_error_dynamics(
    q_err0: float,
    q_err_vec,
    w_err,
    w,
    w_d,
    w_dot_d,
    r_tilde,
    tau,
    params: VehicleParams,
):
    """Derivatives of the attitude-error state, used as a test oracle.

        dq_err0 = -1/2 q_err . w_err
        dq_err  =  1/2 (q_err0 w_err + q_err x w_err)
        J dw_err = (J w) x w + tau + J (w_err x R w_d) - J R dw_d

    The scalar-part sign follows the quaternion kinematics (and is confirmed
    against full-state propagation by the dual-propagation test).
    """
    J = params.J
    q_err_vec = np.asarray(q_err_vec, dtype=float)
    w_err = np.asarray(w_err, dtype=float)
    w = np.asarray(w, dtype=float)
    rw_d = np.asarray(r_tilde) @ np.asarray(w_d, dtype=float)
    dq0 = -0.5 * (q_err_vec @ w_err)
    dqv = 0.5 * (q_err0 * w_err + np.cross(q_err_vec, w_err))
    dwe = (np.cross(J * w, w) + np.asarray(tau, dtype=float)) / J + np.cross(w_err, rw_d) - (
        np.asarray(r_tilde) @ np.asarray(w_dot_d, dtype=float)
    )
    return dq0, dqv, dwe


def inner_step(
    state: RigidBodyState,
    ref: AttitudeReference,
    lam: AdaptiveInnerState,
    gains: InnerGains,
    params: VehicleParams,
    dt: float,
    sliding_prev: SlidingState | None = None,
):
    """One attitude-control tick: error, surface, torque, adaptation.

    Returns (torque, new adaptive state, sliding state).  The sliding state
    must be fed back on the next call for the branch selection.
    """
    s_prev = np.zeros(3) if sliding_prev is None else sliding_prev.s
    q_err = quat_error(state.q, ref.q_d, canonical=True)
    r_tilde = error_rotation(q_err)
    w_err = omega_error(state.w, r_tilde, ref.w_d)
    sliding = sliding_surface(q_err[1:4], w_err, gains, s_prev)
    q_err_dot = 0.5 * (q_err[0] * w_err + np.cross(q_err[1:4], w_err))
    tau = torque_control(
        state.w, r_tilde, ref.w_d, ref.w_dot_d, sliding, q_err[1:4], q_err_dot, lam, gains, params
    )
    lam_new = update_lambda(lam, sliding.s, gains, dt)
    return tau, lam_new, sliding
