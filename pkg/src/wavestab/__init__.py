from __future__ import annotations

from .errors import (
    ConfigError,
    GridError,
    HaloError,
    NumericalError,
    WaveStabError,
)
from .grid import OversetGrid1D, SweepPlan, build_overset, enumerate_grids
from .stepping import SchemeCase, SchemeConfig, TimeMode

__version__ = "0.1.0"

__all__ = [
    "__version__",
    "ConfigError",
    "GridError",
    "HaloError",
    "NumericalError",
    "WaveStabError",
    "OversetGrid1D",
    "SweepPlan",
    "build_overset",
    "enumerate_grids",
    "SchemeCase",
    "SchemeConfig",
    "TimeMode",
]
