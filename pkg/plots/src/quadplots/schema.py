"""Log-schema handling: column contracts and validated CSV loading."""

import pandas as pd

#: Full simulator log schema, in file order.
LOG_COLUMNS = [
    "t", "px", "py", "pz", "vx", "vy", "vz", "q0", "q1", "q2", "q3",
    "wx", "wy", "wz", "pdx", "pdy", "pdz", "q0d", "q1d", "q2d", "q3d",
    "wdx", "wdy", "wdz", "epx", "epy", "epz", "evx", "evy", "evz",
    "eq0", "eq1", "eq2", "eq3", "ewx", "ewy", "ewz",
    "thrust", "tau1", "tau2", "tau3", "psix", "psiy", "psiz",
    "lam1", "lam2", "lam3", "s1", "s2", "s3", "Vpos", "Vatt",
    "m", "J11", "J22", "J33", "branch1", "branch2", "branch3", "gimbal_flag",
]


class SchemaMismatch(ValueError):
    """A log is missing columns a figure needs."""

    def __init__(self, missing):
        self.missing = sorted(missing)
        super().__init__(f"log is missing required columns: {', '.join(self.missing)}")


def require_columns(df: pd.DataFrame, needed) -> None:
    missing = [c for c in needed if c not in df.columns]
    if missing:
        raise SchemaMismatch(missing)


def load_log(path) -> pd.DataFrame:
    """Read a simulator CSV and check it carries the full schema."""
    df = pd.read_csv(path)
    require_columns(df, LOG_COLUMNS)
    return df
