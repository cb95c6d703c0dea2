"""Scenario runner: cascade wiring, logging, metrics and Lyapunov monitors.

One scenario is one deterministic sequential run.  The outer loop produces
thrust and desired attitude at its own rate, a streaming differentiator
derives the desired angular rates, and the inner loop (quaternion or Euler
baseline) produces torque at the dynamics rate.  One log record is written
per outer tick.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import euler as euler_mod
from .dynamics import (
    ControlOutput,
    ParamSchedule,
    RigidBodyState,
    params_at,
    step_rk4,
)
from .errors import (
    EmptyLog,
    ExtractionSingular,
    NumericalDivergence,
    ScenarioError,
    ThrustTooSmall,
)
from .inner import AdaptiveInnerState, InnerGains, SlidingState, error_rotation, inner_step, omega_error
from .outer import AdaptiveOuterState, OuterGains, outer_step, virtual_velocity
from .quat import quat_error
from .reference import QdDifferentiator, Trajectory

#: Exact CSV column order of the log schema.
CSV_COLUMNS = [
    "t", "px", "py", "pz", "vx", "vy", "vz", "q0", "q1", "q2", "q3",
    "wx", "wy", "wz", "pdx", "pdy", "pdz", "q0d", "q1d", "q2d", "q3d",
    "wdx", "wdy", "wdz", "epx", "epy", "epz", "evx", "evy", "evz",
    "eq0", "eq1", "eq2", "eq3", "ewx", "ewy", "ewz",
    "thrust", "tau1", "tau2", "tau3", "psix", "psiy", "psiz",
    "lam1", "lam2", "lam3", "s1", "s2", "s3", "Vpos", "Vatt",
    "m", "J11", "J22", "J33", "branch1", "branch2", "branch3", "gimbal_flag",
]


@dataclass
class Scenario:
    """Everything needed for one deterministic run."""

    name: str
    duration: float
    dt: float
    outer_rate: float
    inner_rate: float
    initial_state: RigidBodyState
    trajectory: Trajectory
    schedule: ParamSchedule
    outer_gains: OuterGains
    inner_gains: InnerGains
    controller: str = "quaternion"  # or "euler"
    psi0: np.ndarray = field(default_factory=lambda: np.full(3, 0.5))
    lam0: np.ndarray = field(default_factory=lambda: np.full(3, 0.1))
    seed: int = 0
    out_path: Optional[str] = None

    def __post_init__(self):
        if self.controller not in ("quaternion", "euler"):
            raise ScenarioError(f"unknown controller {self.controller!r}")
        if self.duration <= 0.0 or self.dt <= 0.0:
            raise ScenarioError("duration and dt must be positive")
        if self.duration / self.dt > 1e7:
            raise ScenarioError("duration/dt exceeds 1e7 steps")
        if self.inner_rate < self.outer_rate:
            raise ScenarioError("inner rate must be at least the outer rate")
        self.psi0 = np.asarray(self.psi0, dtype=float)
        self.lam0 = np.asarray(self.lam0, dtype=float)
        self.schedule.validate(self.duration)


def _scalar_field(idx):
    return property(lambda self: float(self.data[idx]))


def _vector_field(sl):
    return property(lambda self: self.data[sl])


class LogRecord:
    """One sampled cascade tick, stored flat in the CSV_COLUMNS order.

    Field accessors are views into the flat vector, so building and
    serializing large logs stays cheap.
    """

    __slots__ = ("data",)

    _LAYOUT = {
        "t": 0, "p": slice(1, 4), "v": slice(4, 7), "q": slice(7, 11),
        "w": slice(11, 14), "p_d": slice(14, 17), "q_d": slice(17, 21),
        "w_d": slice(21, 24), "e_p": slice(24, 27), "e_v": slice(27, 30),
        "e_q": slice(30, 34), "e_w": slice(34, 37), "thrust": 37,
        "tau": slice(38, 41), "psi": slice(41, 44), "lam": slice(44, 47),
        "s": slice(47, 50), "v_pos": 50, "v_att": 51, "m": 52,
        "J": slice(53, 56), "branch": slice(56, 59), "gimbal": 59,
    }

    def __init__(self, **fields):
        if set(fields) != set(self._LAYOUT):
            missing = set(self._LAYOUT) ^ set(fields)
            raise TypeError(f"LogRecord fields mismatch: {sorted(missing)}")
        data = np.empty(len(CSV_COLUMNS))
        for name, where in self._LAYOUT.items():
            data[where] = fields[name]
        self.data = data

    @classmethod
    def from_flat(cls, data) -> "LogRecord":
        rec = cls.__new__(cls)
        rec.data = np.asarray(data, dtype=float)
        return rec

    @classmethod
    def from_row(cls, r) -> "LogRecord":
        return cls.from_flat([float(x) for x in r])

    def row(self) -> list:
        return [float(x) for x in self.data]

    @property
    def branch(self) -> np.ndarray:
        return self.data[56:59].astype(int)

    @property
    def gimbal(self) -> int:
        return int(self.data[59])


for _name, _where in LogRecord._LAYOUT.items():
    if _name in ("branch", "gimbal"):
        continue
    setattr(LogRecord, _name,
            _scalar_field(_where) if isinstance(_where, int) else _vector_field(_where))


@dataclass
class Metrics:
    """Run-level summary numbers."""

    position_rmse: float
    position_rmse_settled: float
    attitude_rmse: float
    attitude_rmse_settled: float
    settling_time: float
    settled: bool
    torque_effort: float
    thrust_effort: float
    chattering_index: float
    max_thrust: float
    diverged: bool

    def as_dict(self) -> dict:
        return {
            "position_rmse": self.position_rmse,
            "position_rmse_settled": self.position_rmse_settled,
            "attitude_rmse": self.attitude_rmse,
            "attitude_rmse_settled": self.attitude_rmse_settled,
            "settling_time": self.settling_time,
            "settled": self.settled,
            "torque_effort": self.torque_effort,
            "thrust_effort": self.thrust_effort,
            "chattering_index": self.chattering_index,
            "max_thrust": self.max_thrust,
            "diverged": self.diverged,
        }


def _euler_ref_update(prev_angles, prev_rates, angles_new, h):
    """Wrap-aware backward differences of the desired Euler-angle stream."""
    if prev_angles is None:
        return np.zeros(3), np.zeros(3)
    diff = np.array([euler_mod.wrap_angle(x) for x in (angles_new - prev_angles)])
    rates = diff / h
    if prev_rates is None:
        return rates, np.zeros(3)
    return rates, (rates - prev_rates) / h


def run_scenario(scenario: Scenario):
    """Run one scenario; returns (list of LogRecord, Metrics).

    Divergence (integrator blow-up or a control-law failure such as a
    singular attitude extraction) terminates the run gracefully with the
    partial log and the divergence flag set.
    """
    sc = scenario
    n_steps = int(round(sc.duration / sc.dt))
    outer_every = max(1, int(round(1.0 / (sc.outer_rate * sc.dt))))
    inner_every = max(1, int(round(1.0 / (sc.inner_rate * sc.dt))))
    outer_dt = outer_every * sc.dt
    inner_dt = inner_every * sc.dt

    state = sc.initial_state
    psi = AdaptiveOuterState(sc.psi0.copy())
    lam = AdaptiveInnerState(sc.lam0.copy())
    sliding = SlidingState(np.zeros(3), np.zeros(3, dtype=int))
    differentiator = QdDifferentiator(outer_dt)
    control = ControlOutput(0.0, np.zeros(3))
    ref = None
    outer_out = None
    sample = None
    # Euler-baseline reference stream state
    e_angles_d = None
    e_rates_d = np.zeros(3)
    e_accels_d = np.zeros(3)
    gimbal = 0

    log: list[LogRecord] = []
    diverged = False

    for k in range(n_steps):
        t = k * sc.dt
        try:
            if k % outer_every == 0:
                sample = sc.trajectory.sample(t)
                true_params = params_at(sc.schedule, t)
                outer_out, psi = outer_step(
                    state, sample, psi, sc.outer_gains, sc.schedule.nominal, outer_dt
                )
                ref = differentiator.push(outer_out.q_d)
                if sc.controller == "euler":
                    ang_d, _ = euler_mod.quat_to_euler(ref.q_d)
                    ang_d = ang_d.as_array()
                    e_rates_d, e_accels_d = _euler_ref_update(
                        e_angles_d, e_rates_d if e_angles_d is not None else None,
                        ang_d, outer_dt,
                    )
                    e_angles_d = ang_d

            if k % inner_every == 0:
                # controllers see only the nominal vehicle; the plant is perturbed
                if sc.controller == "quaternion":
                    tau, lam, sliding = inner_step(
                        state, ref, lam, sc.inner_gains, sc.schedule.nominal, inner_dt, sliding
                    )
                    gimbal = 0
                else:
                    tau, lam, s_val, branch, gflag = euler_mod.euler_attitude_controller(
                        state, e_angles_d, e_rates_d, e_accels_d, lam,
                        sc.inner_gains, sc.schedule.nominal, inner_dt, sliding.s,
                    )
                    sliding = SlidingState(s_val, branch)
                    gimbal = int(gflag)
                if not np.all(np.isfinite(tau)):
                    raise NumericalDivergence(f"torque not finite at t={t:.3f}")
                control = ControlOutput(outer_out.thrust, tau)

            if k % outer_every == 0:
                log.append(
                    _make_record(t, state, sample, ref, control, psi, lam,
                                 sliding, true_params, gimbal, sc.outer_gains)
                )

            state = step_rk4(state, control, sc.schedule, t, sc.dt)
        except (NumericalDivergence, ThrustTooSmall, ExtractionSingular):
            diverged = True
            break

    metrics = compute_metrics(log, diverged=diverged)
    return log, metrics


def _make_record(t, state, sample, ref, control, psi, lam, sliding, params, gimbal, outer_gains):
    e_p = state.p - sample.p_d
    # velocity error against the stabilizing virtual velocity
    e_v = state.v - virtual_velocity(e_p, sample.v_d, outer_gains)
    e_q = quat_error(state.q, ref.q_d, canonical=True)
    e_w = omega_error(state.w, error_rotation(e_q), ref.w_d)
    v_pos = 0.5 * float(e_p @ e_p) + 0.5 * float(e_v @ e_v)
    v_att = 0.5 * float(sliding.s @ sliding.s)
    return LogRecord(
        t=t, p=state.p.copy(), v=state.v.copy(), q=state.q.copy(), w=state.w.copy(),
        p_d=sample.p_d.copy(), q_d=ref.q_d.copy(), w_d=ref.w_d.copy(),
        e_p=e_p, e_v=e_v, e_q=e_q, e_w=e_w,
        thrust=control.thrust, tau=control.torque.copy(),
        psi=psi.psi_hat.copy(), lam=lam.lam_hat.copy(), s=sliding.s.copy(),
        v_pos=v_pos, v_att=v_att, m=params.m, J=params.J.copy(),
        branch=np.asarray(sliding.branch, dtype=int), gimbal=gimbal,
    )


def attitude_angle(e_q) -> float:
    """Attitude error magnitude 2 acos(|eq0|) in radians."""
    return 2.0 * math.acos(min(1.0, abs(float(e_q[0]))))


def compute_metrics(log, diverged: bool = False) -> Metrics:
    """Summary metrics over a log; RMSE also reported after settling."""
    if not log:
        raise EmptyLog("cannot compute metrics on an empty log")
    t = np.array([r.t for r in log])
    pe = np.array([np.linalg.norm(r.e_p) for r in log])
    ae = np.array([attitude_angle(r.e_q) for r in log])
    tau = np.array([r.tau for r in log])
    thrust = np.array([r.thrust for r in log])

    # 5% settling on the position error norm (floor 0.05 m for tiny starts)
    threshold = max(0.05 * pe[0], 0.05)
    above = np.nonzero(pe > threshold)[0]
    if above.size == 0:
        settling_time, settled = 0.0, True
    elif above[-1] == len(pe) - 1:
        settling_time, settled = t[-1], False
    else:
        settling_time, settled = float(t[above[-1] + 1]), True

    mask = t >= settling_time if settled else np.ones_like(t, dtype=bool)
    dt = float(np.mean(np.diff(t))) if len(t) > 1 else 0.0
    tau_norm = np.linalg.norm(tau, axis=1)
    chatter = float(np.mean(np.abs(np.diff(tau, axis=0)))) if len(t) > 1 else 0.0
    return Metrics(
        position_rmse=float(np.sqrt(np.mean(pe**2))),
        position_rmse_settled=float(np.sqrt(np.mean(pe[mask] ** 2))),
        attitude_rmse=float(np.sqrt(np.mean(ae**2))),
        attitude_rmse_settled=float(np.sqrt(np.mean(ae[mask] ** 2))),
        settling_time=settling_time,
        settled=settled,
        torque_effort=float(np.sum(tau_norm) * dt),
        thrust_effort=float(np.sum(thrust) * dt),
        chattering_index=chatter,
        max_thrust=float(np.max(thrust)),
        diverged=diverged,
    )


def write_log(log, path) -> None:
    """Write the log as CSV.

    Serialization goes through pyarrow, whose shortest-round-trip float
    formatting makes write/read lossless.
    """
    import pyarrow as pa
    from pyarrow import csv as pacsv

    if log:
        rows = np.asfortranarray(np.stack([rec.data for rec in log]))
    else:
        rows = np.empty((0, len(CSV_COLUMNS)))
    table = pa.table({name: rows[:, i] for i, name in enumerate(CSV_COLUMNS)})
    try:
        with open(path, "wb") as fh:
            fh.write((",".join(CSV_COLUMNS) + "\n").encode())
            pacsv.write_csv(
                table, fh,
                pacsv.WriteOptions(include_header=False, quoting_style="none"),
            )
    except OSError as exc:
        raise OSError(f"failed writing log to {path}: {exc}") from exc


def read_log(path) -> list:
    """Read a CSV log written by write_log."""
    import pyarrow as pa
    from pyarrow import csv as pacsv

    try:
        table = pacsv.read_csv(str(path))
    except (OSError, pa.ArrowInvalid) as exc:
        raise OSError(f"failed reading log from {path}: {exc}") from exc
    if table.column_names != CSV_COLUMNS:
        raise ScenarioError(f"unexpected log header in {path}")
    if table.num_rows == 0:
        return []
    arr = np.column_stack([table.column(name).to_numpy() for name in CSV_COLUMNS])
    return [LogRecord.from_flat(r) for r in arr]
