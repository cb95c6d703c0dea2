"""The five figure kinds.

Everything renders through the Agg backend so output is deterministic and
headless-safe.  Each kind declares the columns it touches; anything missing
raises SchemaMismatch before any drawing happens.
"""

from dataclasses import dataclass, field

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .schema import load_log, require_columns  # noqa: E402

_ERR_COLS = ["t", "epx", "epy", "epz", "eq0", "ewx", "ewy", "ewz"]
_TRAJ_COLS = ["px", "py", "pz", "pdx", "pdy", "pdz"]
_CTRL_COLS = ["t", "thrust", "tau1", "tau2", "tau3"]
_ADAPT_COLS = ["t", "psix", "psiy", "psiz", "lam1", "lam2", "lam3", "s1", "s2", "s3"]


@dataclass
class PlotSpec:
    """One figure request: input log(s), kind, output path, style knobs."""

    inputs: list
    kind: str
    output: str
    title: str = ""
    dpi: int = 120
    labels: list = field(default_factory=list)

    def __post_init__(self):
        if self.kind not in FIGURE_KINDS:
            raise ValueError(f"unknown figure kind {self.kind!r}; know {sorted(FIGURE_KINDS)}")
        want = 2 if self.kind == "compare" else 1
        if len(self.inputs) != want:
            raise ValueError(f"figure kind {self.kind!r} takes {want} input log(s), "
                             f"got {len(self.inputs)}")


def _attitude_angle(df):
    return 2.0 * np.arccos(np.clip(np.abs(df["eq0"]), 0.0, 1.0))


def _pos_error_norm(df):
    return np.sqrt(df["epx"] ** 2 + df["epy"] ** 2 + df["epz"] ** 2)


def fig_traj3d(df, spec):
    require_columns(df, _TRAJ_COLS)
    fig = plt.figure(figsize=(7, 6))
    ax = fig.add_subplot(projection="3d")
    # plot with z up for readability (the log stores z down)
    ax.plot(df["pdx"], df["pdy"], -df["pdz"], "k--", lw=1.2, label="reference")
    ax.plot(df["px"], df["py"], -df["pz"], "r-", lw=1.0, label="flown")
    ax.set_xlabel("x [m]")
    ax.set_ylabel("y [m]")
    ax.set_zlabel("altitude [m]")
    ax.legend(loc="upper left")
    return fig


def fig_errors(df, spec):
    require_columns(df, _ERR_COLS)
    fig, axes = plt.subplots(3, 1, figsize=(7, 8), sharex=True)
    for col, label in (("epx", "x"), ("epy", "y"), ("epz", "z")):
        axes[0].plot(df["t"], df[col], lw=0.9, label=label)
    axes[0].set_ylabel("position error [m]")
    axes[0].legend(loc="upper right", ncols=3)
    axes[1].plot(df["t"], _attitude_angle(df), "r-", lw=0.9)
    axes[1].set_ylabel("attitude error [rad]")
    for col, label in (("ewx", "x"), ("ewy", "y"), ("ewz", "z")):
        axes[2].plot(df["t"], df[col], lw=0.9, label=label)
    axes[2].set_ylabel("rate error [rad/s]")
    axes[2].set_xlabel("t [s]")
    axes[2].legend(loc="upper right", ncols=3)
    return fig


def fig_controls(df, spec):
    require_columns(df, _CTRL_COLS)
    fig, axes = plt.subplots(2, 1, figsize=(7, 6), sharex=True)
    axes[0].plot(df["t"], df["thrust"], "b-", lw=0.9)
    axes[0].set_ylabel("thrust [N]")
    for col, label in (("tau1", "roll"), ("tau2", "pitch"), ("tau3", "yaw")):
        axes[1].plot(df["t"], df[col], lw=0.9, label=label)
    axes[1].set_ylabel("torque [N m]")
    axes[1].set_xlabel("t [s]")
    axes[1].legend(loc="upper right", ncols=3)
    return fig


def fig_adaptive(df, spec):
    require_columns(df, _ADAPT_COLS)
    fig, axes = plt.subplots(3, 1, figsize=(7, 8), sharex=True)
    for col, label in (("psix", "x"), ("psiy", "y"), ("psiz", "z")):
        axes[0].plot(df["t"], df[col], lw=0.9, label=label)
    axes[0].set_ylabel("velocity-damping estimate")
    axes[0].legend(loc="lower right", ncols=3)
    for col in ("lam1", "lam2", "lam3"):
        axes[1].plot(df["t"], df[col], lw=0.9)
    axes[1].set_ylabel("switching gain estimate")
    s_norm = np.sqrt(df["s1"] ** 2 + df["s2"] ** 2 + df["s3"] ** 2)
    axes[2].plot(df["t"], s_norm, "k-", lw=0.9)
    axes[2].set_ylabel("sliding value norm")
    axes[2].set_xlabel("t [s]")
    return fig


def fig_compare(dfs, spec):
    df_a, df_b = dfs
    for df in dfs:
        require_columns(df, ["t", "epx", "epy", "epz", "eq0"])
    labels = spec.labels if len(spec.labels) == 2 else ["run A", "run B"]
    fig, axes = plt.subplots(2, 1, figsize=(7, 6), sharex=True)
    # first run solid, second dashed, so the overlay reads at a glance
    axes[0].plot(df_a["t"], _pos_error_norm(df_a), "r-", lw=1.1, label=labels[0])
    axes[0].plot(df_b["t"], _pos_error_norm(df_b), "b--", lw=1.1, label=labels[1])
    axes[0].set_ylabel("position error norm [m]")
    axes[0].legend(loc="upper right")
    axes[1].plot(df_a["t"], _attitude_angle(df_a), "r-", lw=1.1)
    axes[1].plot(df_b["t"], _attitude_angle(df_b), "b--", lw=1.1)
    axes[1].set_ylabel("attitude error [rad]")
    axes[1].set_xlabel("t [s]")
    return fig


FIGURE_KINDS = {
    "traj3d": fig_traj3d,
    "errors": fig_errors,
    "controls": fig_controls,
    "adaptive": fig_adaptive,
    "compare": fig_compare,
}


def render(spec: PlotSpec) -> str:
    """Render one figure to spec.output; returns the output path."""
    dfs = [load_log(p) for p in spec.inputs]
    builder = FIGURE_KINDS[spec.kind]
    fig = builder(dfs if spec.kind == "compare" else dfs[0], spec)
    if spec.title:
        fig.suptitle(spec.title)
    fig.tight_layout()
    # empty metadata keeps repeat renders byte-identical
    fig.savefig(spec.output, dpi=spec.dpi, metadata={})
    plt.close(fig)
    return spec.output
