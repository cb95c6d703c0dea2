"""Exception types shared across the simulator."""


class QuadsimError(Exception):
    """Base class for all simulator errors."""


class DegenerateQuaternion(QuadsimError):
    """Quaternion norm too small to normalize."""


class NumericalDivergence(QuadsimError):
    """A state component left the sane range during integration."""


class InvalidSchedule(QuadsimError):
    """A parameter schedule produced a non-physical (non-positive) value."""


class NonTangentInput(QuadsimError):
    """Quaternion rate is not tangent to the unit sphere at the given point."""


class ThrustTooSmall(QuadsimError):
    """Commanded thrust below the attitude-extraction guard."""


class ExtractionSingular(QuadsimError):
    """Desired-attitude extraction hit the near-180-degree-tilt singularity."""


class EmptyLog(QuadsimError):
    """Metrics requested on an empty log."""


class ScenarioError(QuadsimError):
    """Scenario file invalid or inconsistent."""
