"""Cascaded quaternion flight controller and 6-DOF quadrotor simulator."""

from . import dynamics, euler, harness, inner, outer, quat, reference  # noqa: F401

__all__ = ["dynamics", "euler", "harness", "inner", "outer", "quat", "reference"]
__version__ = "0.1.0"
