"""Unit-quaternion algebra, kinematics, and attitude errors.

Conventions used throughout the package:

* quaternions are length-4 numpy arrays ``[q0, q1, q2, q3]``, scalar first;
* ``quat_mul`` is the Hamilton product (``i*j = k``);
* ``quat_to_rot`` returns ``R = (q0^2 - q.q) I + 2 q q^T + 2 q0 [q]x``, which
  maps body-frame vectors into the inertial frame and satisfies
  ``R(a*b) = R(a) R(b)``;
* the attitude error ``quat_error(Q, Qd)`` equals ``conj(Qd) * Q``, so the
  actual-to-desired relative rotation seen in the body frame is
  ``quat_to_rot(err).T``.

All functions are pure and allocate fresh arrays.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import DegenerateQuaternion

IDENTITY = np.array([1.0, 0.0, 0.0, 0.0])

_NORM_EPS = 1e-12


def skew(v) -> np.ndarray:
    """Return the cross-product matrix [v]x with skew(v) @ w == cross(v, w)."""
    return np.array(
        [
            [0.0, -v[2], v[1]],
            [v[2], 0.0, -v[0]],
            [-v[1], v[0], 0.0],
        ]
    )


def quat_mul(a, b) -> np.ndarray:
    """Hamilton product of two unit quaternions, renormalized."""
    a0, a1, a2, a3 = a
    b0, b1, b2, b3 = b
    out = np.array(
        [
            a0 * b0 - a1 * b1 - a2 * b2 - a3 * b3,
            a0 * b1 + b0 * a1 + a2 * b3 - a3 * b2,
            a0 * b2 + b0 * a2 + a3 * b1 - a1 * b3,
            a0 * b3 + b0 * a3 + a1 * b2 - a2 * b1,
        ]
    )
    return out / math.sqrt(out @ out)


def quat_conj(q) -> np.ndarray:
    """Conjugate (inverse, for unit quaternions)."""
    return np.array([q[0], -q[1], -q[2], -q[3]])


def quat_to_rot(q) -> np.ndarray:
    """Rotation matrix of a unit quaternion (body -> inertial)."""
    q0 = q[0]
    qv = np.asarray(q[1:4])
    return (q0 * q0 - qv @ qv) * np.eye(3) + 2.0 * np.outer(qv, qv) + 2.0 * q0 * skew(qv)


def quat_normalize(q_raw, canonical: bool = False) -> np.ndarray:
    """Normalize a raw 4-vector to unit norm.

    With ``canonical=True`` the sign is flipped so that q0 >= 0 (both signs
    represent the same rotation).  Raises DegenerateQuaternion when the norm
    is at or below 1e-12.
    """
    q = np.asarray(q_raw, dtype=float)
    n = math.sqrt(q @ q)
    if n <= _NORM_EPS:
        raise DegenerateQuaternion(f"cannot normalize quaternion with norm {n:.3e}")
    q = q / n
    if canonical and q[0] < 0.0:
        q = -q
    return q


def quat_error(q, q_d, canonical: bool = False) -> np.ndarray:
    """Attitude error between actual Q and desired Qd.

    Components:
        err0 = q0*q0d + qd . q
        errv = q0d*q - q0*qd + cross(q, qd)

    which is ``conj(Qd) * Q`` in the Hamilton convention.  The result is unit
    norm.  With ``canonical=True`` the q0 >= 0 hemisphere is enforced
    (controllers use this to avoid unwinding; raw states are never flipped).
    """
    q0 = q[0]
    qv = np.asarray(q[1:4])
    q0d = q_d[0]
    qvd = np.asarray(q_d[1:4])
    e0 = q0 * q0d + qvd @ qv
    ev = q0d * qv - q0 * qvd + np.cross(qv, qvd)
    err = np.array([e0, ev[0], ev[1], ev[2]])
    err /= math.sqrt(err @ err)
    if canonical and err[0] < 0.0:
        err = -err
    return err


def quat_kinematics(q, w) -> np.ndarray:
    """Time derivative of the attitude quaternion for body rate w.

        dq0 = -1/2 q . w
        dqv = 1/2 (q0 w + cross(q, w))

    The result is tangent: q . dq == 0.
    """
    q0 = q[0]
    qv = np.asarray(q[1:4])
    w = np.asarray(w)
    dq0 = -0.5 * (qv @ w)
    dqv = 0.5 * (q0 * w + np.cross(qv, w))
    return np.array([dq0, dqv[0], dqv[1], dqv[2]])


def quat_from_axis_angle(axis, angle: float) -> np.ndarray:
    """Unit quaternion rotating by `angle` radians about `axis`."""
    axis = np.asarray(axis, dtype=float)
    n = math.sqrt(axis @ axis)
    if n <= _NORM_EPS:
        if abs(angle) <= _NORM_EPS:
            return IDENTITY.copy()
        raise DegenerateQuaternion("axis has zero norm")
    half = 0.5 * angle
    s = math.sin(half) / n
    return np.array([math.cos(half), s * axis[0], s * axis[1], s * axis[2]])
