"""Single-grid time stepping on a periodic 1D domain."""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property, lru_cache

import numpy as np
import numpy.typing as npt

from ..errors import ConfigError
from ..operators import (
    dissipation_stencil,
    laplacian_stencil,
    squared_laplacian_stencil,
    stencil_matrix,
)
from .config import DissipationMode, FieldState, FirstStepTerms, SchemeConfig, TimeMode
from .solve import LinearSolver

__all__ = [
    "PeriodicGrid1D",
    "PeriodicStepper",
    "advance_periodic",
    "advance_monolithic_uw",
    "periodic_first_step",
]


@dataclass(frozen=True, kw_only=True)
class PeriodicGrid1D:
    n: int
    length: float = 2.0 * math.pi

    def __post_init__(self):
        if self.n < 5:
            raise ConfigError(f"periodic grid needs at least 5 points, got {self.n}")

    @property
    def h(self) -> float:
        return self.length / self.n

    @property
    def coords(self) -> npt.NDArray[np.float64]:
        return np.arange(self.n) * self.h


class PeriodicStepper:
    """Matrices of one time step on a periodic grid.

    ``mode`` selects the explicit or implicit weights; the dissipation variant
    comes from ``config.dissipation``.
    """

    def __init__(
        self,
        grid: PeriodicGrid1D,
        config: SchemeConfig,
        dt: float,
        mode: TimeMode = TimeMode.implicit,
    ):
        self.grid = grid
        self.config = config
        self.dt = dt
        self.mode = mode

        n, h, c, p = grid.n, grid.h, config.c, config.p
        w = config.weights(mode)
        eye = np.eye(n)
        self.L = stencil_matrix(n, laplacian_stencil(p), scale=c**2 / h**2, periodic=True)
        self.L2sq = stencil_matrix(
            n, squared_laplacian_stencil(), scale=c**4 / h**4, periodic=True
        )
        self.Q = stencil_matrix(n, dissipation_stencil(p), scale=c / h, periodic=True)

        z = dt**2
        self.A = eye - w.alpha2 * z * self.L + w.alpha4 * z**2 * self.L2sq
        self.B_current = 2 * eye + w.beta2 * z * self.L - w.beta4 * z**2 * self.L2sq
        self.B_previous = -eye + w.alpha2 * z * self.L - w.alpha4 * z**2 * self.L2sq
        self.U_first = eye + 0.5 * w.beta2 * z * self.L - 0.5 * w.beta4 * z**2 * self.L2sq

        params = config.dissipation_params(h, dt)
        self.mu = 0.0 if params is None else params.nu_gamma * dt / 2.0

    @property
    def explicit(self) -> bool:
        return self.mode is TimeMode.explicit

    @cached_property
    def solver(self) -> LinearSolver:
        return LinearSolver(self.A, name="periodic A")

    @cached_property
    def monolithic_solver(self) -> LinearSolver:
        return LinearSolver(self.A + self.mu * self.Q, name="periodic A + mu Q")

    def _predict(self, current: npt.NDArray, previous: npt.NDArray) -> npt.NDArray:
        rhs = self.B_current @ current + self.B_previous @ previous
        return rhs if self.explicit else self.solver.solve(rhs)

    def step(self, current: npt.NDArray, previous: npt.NDArray) -> npt.NDArray:
        if self.config.dissipation is DissipationMode.monolithic:
            return self.step_monolithic(current, previous)
        u = self._predict(current, previous)
        for _ in range(self.config.corrections):
            u = u - self.mu * (self.Q @ (u - previous))
        return u

    def step_monolithic(self, current: npt.NDArray, previous: npt.NDArray) -> npt.NDArray:
        rhs = self.B_current @ current + (self.B_previous + self.mu * self.Q) @ previous
        return self.monolithic_solver.solve(rhs)

    def first_step(self, terms: FirstStepTerms) -> npt.NDArray:
        v = self.dt * terms.u1[0]
        rhs = self.U_first @ terms.u0[0] + 0.5 * terms.W[0] + self.A @ v - v
        return rhs if self.explicit else self.solver.solve(rhs)


@lru_cache(maxsize=32)
def _stepper(
    grid: PeriodicGrid1D, config: SchemeConfig, dt: float, mode: TimeMode
) -> PeriodicStepper:
    return PeriodicStepper(grid, config, dt, mode)


def advance_periodic(
    state: FieldState,
    grid: PeriodicGrid1D,
    config: SchemeConfig,
    mode: TimeMode = TimeMode.implicit,
) -> FieldState:
    stepper = _stepper(grid, config, state.dt, mode)
    return state.advanced([stepper.step(state.current[0], state.previous[0])])


def advance_monolithic_uw(
    state: FieldState, grid: PeriodicGrid1D, config: SchemeConfig
) -> FieldState:
    """IME step with the upwind dissipation folded into the implicit matrix."""
    stepper = _stepper(grid, config, state.dt, TimeMode.implicit)
    return state.advanced([stepper.step_monolithic(state.current[0], state.previous[0])])


def periodic_first_step(
    u0: npt.ArrayLike,
    u1: npt.ArrayLike,
    grid: PeriodicGrid1D,
    config: SchemeConfig,
    dt: float,
    mode: TimeMode = TimeMode.implicit,
) -> FieldState:
    """Start from initial data; explicit mode gives the Taylor start."""
    terms = FirstStepTerms.build([u0], [u1], [grid.h], config, dt, periodic=True)
    u_1 = _stepper(grid, config, dt, mode).first_step(terms)
    return FieldState(current=(u_1,), previous=(terms.u0[0],), n=1, dt=dt)
