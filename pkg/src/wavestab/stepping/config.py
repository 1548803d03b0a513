from __future__ import annotations

import re
from collections.abc import Sequence
from dataclasses import asdict, dataclass, field, replace
from enum import StrEnum
from typing import Any, NamedTuple

import numpy as np
import numpy.typing as npt

from ..errors import BoundViolationError, ConfigError
from ..operators import DissipationParams, apply_L, dissipation_coefficient

__all__ = [
    "TimeMode",
    "DissipationMode",
    "SchemeCase",
    "SchemeWeights",
    "SchemeConfig",
    "FieldState",
    "FirstStepTerms",
    "parse_scheme",
    "default_safety_factor",
]

FloatArray = npt.NDArray[np.float64]


class TimeMode(StrEnum):
    explicit = "explicit"
    implicit = "implicit"


class DissipationMode(StrEnum):
    none = "none"
    monolithic = "monolithic"
    predictor_corrector = "pc"


class SchemeCase(StrEnum):
    EME = "EME"
    IME = "IME"
    SPIE = "SPIE"


def parse_scheme(tag: str) -> tuple[SchemeCase, int]:
    """``"SPIE4"`` -> ``(SchemeCase.SPIE, 4)``."""
    m = re.fullmatch(r"(EME|IME|SPIE)([24])", tag.strip().upper())
    if m is None:
        raise ConfigError(f"unknown scheme {tag!r}, expected EME2, IME4, SPIE2, ...")
    return SchemeCase(m.group(1)), int(m.group(2))


def default_safety_factor(n_u: int, case: SchemeCase = SchemeCase.SPIE) -> float:
    """0.9, or 1.9 for the partitioned scheme with two corrections."""
    return 1.9 if case is SchemeCase.SPIE and n_u == 2 else 0.9


class SchemeWeights(NamedTuple):
    alpha2: float
    beta2: float
    alpha4: float
    beta4: float


@dataclass(frozen=True, kw_only=True)
class SchemeConfig:
    p: int = 2
    """Order of accuracy, 2 or 4"""
    alpha2: float = 0.25
    alpha4: float = 1.0 / 12.0
    modes: tuple[TimeMode, TimeMode] = (TimeMode.explicit, TimeMode.implicit)
    """Time mode of the (left, right) component grids"""
    dissipation: DissipationMode = DissipationMode.predictor_corrector
    gamma: float = 1.0
    """Scale of the upwind dissipation, nu_gamma = gamma * nu_p"""
    n_u: int = 1
    """Number of dissipation corrections"""
    s_f: float | None = None
    """Safety factor, see ``default_safety_factor`` when unset"""
    c: float = 1.0
    cfl: float = 0.9
    """Target CFL number on the reference grid"""

    def __post_init__(self):
        if self.p not in (2, 4):
            raise ConfigError(f"order p must be 2 or 4, got {self.p}")
        if len(self.modes) != 2:
            raise ConfigError(f"need one time mode per component grid, got {self.modes}")
        if not 0.0 <= self.gamma <= 1.0:
            raise ConfigError(f"gamma must lie in [0, 1], got {self.gamma}")
        if self.n_u < 0:
            raise ConfigError(f"n_u must be non-negative, got {self.n_u}")
        if self.c <= 0 or self.cfl <= 0:
            raise ConfigError(f"wave speed and CFL must be positive, got c={self.c}, cfl={self.cfl}")
        sigma = 2 if self.n_u % 2 == 0 else 1
        if self.safety_factor < 0:
            raise ConfigError(f"safety factor must be non-negative, got {self.s_f}")
        if self.safety_factor >= sigma:
            raise BoundViolationError(
                f"safety factor {self.safety_factor} is not below sigma={sigma} for n_u={self.n_u}"
            )

    @property
    def beta2(self) -> float:
        return 1.0 - 2.0 * self.alpha2

    @property
    def beta4(self) -> float:
        return self.alpha2 - 2.0 * self.alpha4 - 1.0 / 12.0

    @property
    def safety_factor(self) -> float:
        return default_safety_factor(self.n_u, self.case) if self.s_f is None else self.s_f

    @property
    def all_explicit(self) -> bool:
        return all(m is TimeMode.explicit for m in self.modes)

    @property
    def case(self) -> SchemeCase:
        if self.all_explicit:
            return SchemeCase.EME
        if all(m is TimeMode.implicit for m in self.modes):
            return SchemeCase.IME
        return SchemeCase.SPIE

    @property
    def tag(self) -> str:
        return f"{self.case}{self.p}"

    @property
    def corrections(self) -> int:
        """Predictor-corrector dissipation stages taken per step."""
        if self.dissipation is DissipationMode.predictor_corrector:
            return self.n_u
        return 0

    def weights(self, mode: TimeMode) -> SchemeWeights:
        """Time weights; p=2 schemes carry no squared-Laplacian terms."""
        if mode is TimeMode.explicit:
            return SchemeWeights(0.0, 1.0, 0.0, -1.0 / 12.0 if self.p == 4 else 0.0)
        if self.p == 2:
            return SchemeWeights(self.alpha2, self.beta2, 0.0, 0.0)
        return SchemeWeights(self.alpha2, self.beta2, self.alpha4, self.beta4)

    def reference_spacing(self, spacings: Sequence[float]) -> float:
        """Smallest explicit-grid spacing for partitioned schemes, else smallest overall."""
        if self.case is SchemeCase.SPIE:
            return min(h for h, m in zip(spacings, self.modes) if m is TimeMode.explicit)
        return min(spacings)

    def time_step(self, spacings: Sequence[float]) -> float:
        return self.cfl * self.reference_spacing(spacings) / self.c

    def dissipation_params(self, h: float, dt: float) -> DissipationParams | None:
        if self.dissipation is DissipationMode.none:
            return None
        if self.dissipation is DissipationMode.predictor_corrector and self.n_u == 0:
            return None
        return dissipation_coefficient(
            self.p,
            max(self.n_u, 1),
            self.safety_factor,
            [self.c * abs(dt) / h],
            gamma=self.gamma,
        )

    def trapezoidal(self) -> SchemeConfig:
        return replace(self, alpha2=0.5, alpha4=5.0 / 24.0)

    @classmethod
    def for_case(cls, case: SchemeCase | str, p: int, **overrides: Any) -> SchemeConfig:
        """Defaults of each stability sweep case, with optional overrides."""
        case = SchemeCase(case)
        match case:
            case SchemeCase.EME:
                base: dict[str, Any] = dict(
                    modes=(TimeMode.explicit, TimeMode.explicit), cfl=0.9, n_u=1
                )
            case SchemeCase.IME:
                base = dict(
                    modes=(TimeMode.implicit, TimeMode.implicit),
                    cfl=4.0 if p == 2 else 5.0,
                    n_u=4 if p == 2 else 5,
                )
            case SchemeCase.SPIE:
                base = dict(
                    modes=(TimeMode.explicit, TimeMode.implicit),
                    cfl=0.9,
                    n_u=1 if p == 2 else 2,
                )
        base.update({k: v for k, v in overrides.items() if v is not None})
        return cls(p=p, **base)

    def to_dict(self) -> dict[str, Any]:
        out = asdict(self)
        out["modes"] = [str(m) for m in self.modes]
        out["dissipation"] = str(self.dissipation)
        out["s_f"] = self.safety_factor
        out["tag"] = self.tag
        return out


@dataclass(frozen=True, kw_only=True)
class FieldState:
    current: tuple[npt.NDArray[Any], ...]
    """U^n, one array per component grid"""
    previous: tuple[npt.NDArray[Any], ...]
    """U^{n-1}"""
    n: int = 0
    dt: float

    @property
    def t(self) -> float:
        return self.n * self.dt

    def advanced(self, new: Sequence[npt.NDArray[Any]]) -> FieldState:
        return FieldState(current=tuple(new), previous=self.current, n=self.n + 1, dt=self.dt)


@dataclass(frozen=True, kw_only=True)
class FirstStepTerms:
    u0: tuple[npt.NDArray[Any], ...]
    u1: tuple[npt.NDArray[Any], ...]
    W: tuple[npt.NDArray[Any], ...] = field(default=())
    """2 dt u1 + (dt^3/3) L_2 u1, the last term only for p=4.

    Exact at every point with both neighbours in the array, so at every active
    point of a component grid.
    """

    @classmethod
    def build(
        cls,
        u0: Sequence[npt.ArrayLike],
        u1: Sequence[npt.ArrayLike],
        spacings: Sequence[float],
        config: SchemeConfig,
        dt: float,
        *,
        periodic: bool = False,
    ) -> FirstStepTerms:
        u0s = tuple(np.asarray(u) for u in u0)
        u1s = tuple(np.asarray(u) for u in u1)
        W = []
        for u, h in zip(u1s, spacings):
            w = 2.0 * dt * u
            if config.p == 4:
                lu = np.zeros_like(u)
                if periodic:
                    lu = apply_L(2, np.pad(u, 1, mode="wrap"), h, config.c)
                else:
                    lu[1:-1] = apply_L(2, u, h, config.c)
                w = w + dt**3 / 3.0 * lu
            W.append(w)
        return cls(u0=u0s, u1=u1s, W=tuple(W))
