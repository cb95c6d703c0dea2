"""Scenario files: flat key=value text with dotted sections.

Example::

    name = paper_uncertain
    duration = 100.0
    dt = 0.001
    outer.rate = 100
    inner.rate = 1000
    controller = quaternion
    initial.p = 3.2, -2.0, 1.0
    trajectory.kind = helix
    trajectory.radius = 1.0
    perturb.1.target = m
    perturb.1.kind = sinusoid
    perturb.1.amplitude = 0.35
    perturb.1.freq = 0.5

Unknown keys are rejected so typos fail loudly.  Waypoint lists use ';'
between points: ``trajectory.points = 0,0,0 ; 2,0,-1``.
"""

from __future__ import annotations

import numpy as np

from .dynamics import ParamSchedule, Perturbation, RigidBodyState, VehicleParams
from .errors import InvalidSchedule, ScenarioError
from .harness import Scenario
from .inner import InnerGains
from .outer import OuterGains
from .quat import quat_normalize
from .reference import make_trajectory

_SCALAR_KEYS = {
    "name", "duration", "dt", "controller", "seed",
    "outer.rate", "inner.rate",
    "params.m", "params.g",
    "trajectory.kind", "trajectory.radius", "trajectory.angular_rate",
    "trajectory.climb_rate", "trajectory.segment_time",
    "gains.gamma1", "gains.c1", "gains.c2", "gains.eps", "gains.mu1",
    "gains.lambda", "gains.phi", "gains.surface_derivative",
    "initial.jitter",
}
_VECTOR_KEYS = {
    "initial.p", "initial.v", "initial.q", "initial.w",
    "params.J",
    "trajectory.point", "trajectory.offset", "trajectory.amplitudes",
    "trajectory.freqs", "trajectory.phases", "trajectory.points",
    "gains.theta", "gains.eta",
    "adaptive.psi0", "adaptive.lambda0",
}
_PERTURB_KEYS = {"target", "kind", "offset", "amplitude", "freq", "phase", "rate", "start", "end"}


def parse_scenario_file(path: str) -> dict:
    """Parse a key=value file into a flat dict of raw string values."""
    raw: dict[str, str] = {}
    try:
        with open(path) as fh:
            for lineno, line in enumerate(fh, 1):
                line = line.split("#", 1)[0].strip()
                if not line:
                    continue
                if "=" not in line:
                    raise ScenarioError(f"{path}:{lineno}: expected 'key = value'")
                key, value = (part.strip() for part in line.split("=", 1))
                if key in raw:
                    raise ScenarioError(f"{path}:{lineno}: duplicate key {key!r}")
                raw[key] = value
    except OSError as exc:
        raise ScenarioError(f"cannot read scenario file {path}: {exc}") from exc
    return raw


def _as_float(key, value):
    try:
        return float(value)
    except ValueError:
        raise ScenarioError(f"key {key!r}: expected a number, got {value!r}") from None


def _as_vector(key, value):
    try:
        return np.array([float(x) for x in value.replace(",", " ").split()])
    except ValueError:
        raise ScenarioError(f"key {key!r}: expected numbers, got {value!r}") from None


def _validate_keys(raw: dict):
    for key in raw:
        if key in _SCALAR_KEYS or key in _VECTOR_KEYS:
            continue
        parts = key.split(".")
        if len(parts) == 3 and parts[0] == "perturb" and parts[2] in _PERTURB_KEYS:
            continue
        raise ScenarioError(f"unknown scenario key {key!r}")


def _build_trajectory(raw: dict):
    kind = raw.get("trajectory.kind", "hover")
    offset = _as_vector("trajectory.offset", raw["trajectory.offset"]) if "trajectory.offset" in raw else np.zeros(3)
    if kind == "hover":
        point = _as_vector("trajectory.point", raw.get("trajectory.point", "0,0,0"))
        return make_trajectory("hover", point=point, offset=offset)
    if kind == "helix":
        return make_trajectory(
            "helix",
            radius=_as_float("trajectory.radius", raw.get("trajectory.radius", "1.0")),
            angular_rate=_as_float("trajectory.angular_rate", raw.get("trajectory.angular_rate", "0.2")),
            climb_rate=_as_float("trajectory.climb_rate", raw.get("trajectory.climb_rate", "0.05")),
            offset=offset,
        )
    if kind == "lissajous":
        return make_trajectory(
            "lissajous",
            amplitudes=_as_vector("trajectory.amplitudes", raw.get("trajectory.amplitudes", "1,1,1")),
            freqs_hz=_as_vector("trajectory.freqs", raw.get("trajectory.freqs", "0.1,0.1,0.1")),
            phases=_as_vector("trajectory.phases", raw.get("trajectory.phases", "0,0,0")),
            offset=offset,
        )
    if kind == "waypoints":
        if "trajectory.points" not in raw:
            raise ScenarioError("waypoint trajectory needs trajectory.points")
        points = [
            _as_vector("trajectory.points", chunk)
            for chunk in raw["trajectory.points"].split(";")
            if chunk.strip()
        ]
        for p in points:
            if p.shape != (3,):
                raise ScenarioError(f"waypoints must be 3-vectors, got {p}")
        return make_trajectory(
            "waypoints",
            points=points,
            segment_time=_as_float("trajectory.segment_time", raw.get("trajectory.segment_time", "5.0")),
            offset=offset,
        )
    raise ScenarioError(f"unknown trajectory kind {kind!r}")


def _build_perturbations(raw: dict) -> list:
    indices = sorted(
        {key.split(".")[1] for key in raw if key.startswith("perturb.")},
        key=lambda s: (len(s), s),
    )
    perts = []
    for idx in indices:
        get = lambda name, default=None: raw.get(f"perturb.{idx}.{name}", default)
        target = get("target")
        kind = get("kind")
        if target is None or kind is None:
            raise ScenarioError(f"perturb.{idx} needs both target and kind")
        try:
            perts.append(
                Perturbation(
                    target=target,
                    kind=kind,
                    offset=float(get("offset", 0.0)),
                    amplitude=float(get("amplitude", 0.0)),
                    freq_hz=float(get("freq", 0.0)),
                    phase=float(get("phase", 0.0)),
                    rate=float(get("rate", 0.0)),
                    start=float(get("start", 0.0)),
                    end=float(get("end", 0.0)),
                )
            )
        except (ValueError, InvalidSchedule) as exc:
            raise ScenarioError(f"perturb.{idx}: {exc}") from exc
    return perts


def build_scenario(raw: dict, overrides: dict | None = None) -> Scenario:
    """Turn raw key/value strings into a validated Scenario."""
    raw = dict(raw)
    if overrides:
        raw.update(overrides)
    _validate_keys(raw)

    try:
        nominal = VehicleParams(
            m=_as_float("params.m", raw.get("params.m", "3.5")),
            J=_as_vector("params.J", raw.get("params.J", "2.0, 2.0, 3.5")),
            g=_as_float("params.g", raw.get("params.g", "9.8")),
        )
    except InvalidSchedule as exc:
        raise ScenarioError(str(exc)) from exc

    schedule = ParamSchedule(nominal, _build_perturbations(raw))

    p0 = _as_vector("initial.p", raw.get("initial.p", "0,0,0"))
    seed = int(_as_float("seed", raw.get("seed", "0")))
    jitter = _as_float("initial.jitter", raw.get("initial.jitter", "0.0"))
    if jitter > 0.0:
        rng = np.random.default_rng(seed)
        p0 = p0 + rng.uniform(-jitter, jitter, size=3)
    initial = RigidBodyState(
        p=p0,
        v=_as_vector("initial.v", raw.get("initial.v", "0,0,0")),
        q=quat_normalize(_as_vector("initial.q", raw.get("initial.q", "1,0,0,0"))),
        w=_as_vector("initial.w", raw.get("initial.w", "0,0,0")),
    )

    try:
        outer_gains = OuterGains(
            theta=_as_vector("gains.theta", raw.get("gains.theta", "0.8, 0.5, 0.4")),
            eta=_as_vector("gains.eta", raw.get("gains.eta", "5, 5, 5")),
        )
        inner_gains = InnerGains(
            gamma1=_as_float("gains.gamma1", raw.get("gains.gamma1", "10.0")),
            c1=int(_as_float("gains.c1", raw.get("gains.c1", "3"))),
            c2=int(_as_float("gains.c2", raw.get("gains.c2", "5"))),
            eps=_as_float("gains.eps", raw.get("gains.eps", "0.01")),
            mu1=_as_float("gains.mu1", raw.get("gains.mu1", "2.0")),
            lam=_as_float("gains.lambda", raw.get("gains.lambda", "0.5")),
            phi=_as_float("gains.phi", raw.get("gains.phi", "0.01")),
            derivative_variant=raw.get("gains.surface_derivative", "consistent"),
        )
    except ValueError as exc:
        raise ScenarioError(str(exc)) from exc

    try:
        return Scenario(
            name=raw.get("name", "unnamed"),
            duration=_as_float("duration", raw.get("duration", "10.0")),
            dt=_as_float("dt", raw.get("dt", "0.001")),
            outer_rate=_as_float("outer.rate", raw.get("outer.rate", "100")),
            inner_rate=_as_float("inner.rate", raw.get("inner.rate", "1000")),
            initial_state=initial,
            trajectory=_build_trajectory(raw),
            schedule=schedule,
            outer_gains=outer_gains,
            inner_gains=inner_gains,
            controller=raw.get("controller", "quaternion"),
            psi0=_as_vector("adaptive.psi0", raw.get("adaptive.psi0", "0.5, 0.5, 0.5")),
            lam0=_as_vector("adaptive.lambda0", raw.get("adaptive.lambda0", "0.1, 0.1, 0.1")),
            seed=seed,
        )
    except InvalidSchedule as exc:
        raise ScenarioError(str(exc)) from exc


def load_scenario(path: str, overrides: dict | None = None) -> Scenario:
    return build_scenario(parse_scenario_file(path), overrides)
