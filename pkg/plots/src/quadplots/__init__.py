"""Batch figure rendering for quadsim CSV logs."""

from .schema import SchemaMismatch, load_log
from .figures import FIGURE_KINDS, PlotSpec, render

__all__ = ["FIGURE_KINDS", "PlotSpec", "SchemaMismatch", "load_log", "render"]
__version__ = "0.1.0"
