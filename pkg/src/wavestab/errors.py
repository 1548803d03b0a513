from __future__ import annotations

__all__ = [
    "WaveStabError",
    "ConfigError",
    "BoundViolationError",
    "GridError",
    "InfeasibleOverlapError",
    "DegenerateStencilError",
    "ExplicitInterpolationError",
    "HaloError",
    "NumericalError",
    "SingularSystemError",
    "EigenSolverError",
]


class WaveStabError(Exception):
    """Base class of every error raised by wavestab."""


class ConfigError(WaveStabError, ValueError):
    """Inadmissible scheme or run parameters."""


class BoundViolationError(ConfigError):
    """Safety factor at or above the predictor-corrector stability bound."""


class GridError(WaveStabError, ValueError):
    pass


class InfeasibleOverlapError(GridError):
    pass


class DegenerateStencilError(GridError):
    pass


class ExplicitInterpolationError(GridError):
    """A donor point of one grid is an interpolation point of the other."""


class HaloError(WaveStabError, ValueError):
    pass


class NumericalError(WaveStabError, RuntimeError):
    pass


class SingularSystemError(NumericalError):
    def __init__(self, message: str, *, condition: float) -> None:
        super().__init__(f"{message} (condition estimate {condition:.3e})")
        self.condition = condition


class EigenSolverError(NumericalError):
    pass
