"""Time stepping on 1D overset grids.

Every step runs the partitioned update:

1. explicit grids are advanced pointwise;
2. implicit grids are solved together, their interpolation rows taking the
   freshly updated explicit donors as known values;
3. ``n_u`` predictor-corrector dissipation stages are applied.

Constraints (Dirichlet value, odd ghost symmetry, interpolation) are
re-applied after every stage and after every correction.
"""

from __future__ import annotations

import logging
from collections.abc import Sequence
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import numpy.typing as npt

from ..errors import ConfigError
from ..grid import ComponentGrid1D, OversetGrid1D, Side
from ..operators import (
    dissipation_stencil,
    laplacian_stencil,
    squared_laplacian_stencil,
    stencil_matrix,
)
from .config import DissipationMode, FieldState, FirstStepTerms, SchemeConfig, TimeMode
from .solve import LinearSolver

__all__ = [
    "GridRows",
    "stage_rows",
    "constraint_matrix",
    "apply_constraints",
    "SpieStepper",
    "advance_spie",
    "first_step",
    "initial_state",
]

logger = logging.getLogger(__name__)

FloatArray = npt.NDArray[np.float64]

_SIDES = (Side.left, Side.right)


@dataclass(frozen=True, kw_only=True)
class GridRows:
    """Active-point rows of the stage operators on one component grid.

    Each matrix has one row per active point and one column per grid point.
    """

    grid: ComponentGrid1D
    mode: TimeMode
    A: FloatArray
    """Implicit operator rows, identity rows on explicit grids"""
    B_current: FloatArray
    """Coefficients of U^n"""
    B_previous: FloatArray
    """Coefficients of U^{n-1}"""
    U_first: FloatArray
    """Coefficients of U^0 on the first step"""
    Q: FloatArray
    mu: float
    """nu_gamma * dt / 2 for this grid"""

    @property
    def active(self) -> list[int]:
        return [self.grid.position(j) for j in self.grid.active_indices]


def stage_rows(grid: OversetGrid1D, config: SchemeConfig, dt: float) -> tuple[GridRows, GridRows]:
    if config.dissipation is DissipationMode.monolithic:
        raise ConfigError("monolithic dissipation is only available on periodic grids")

    out = []
    for comp, mode in zip(grid.components, config.modes):
        n, h, c = comp.n_points, comp.h, config.c
        act = [comp.position(j) for j in comp.active_indices]
        w = config.weights(mode)
        z = dt**2
        eye = np.eye(n)[act]
        L = stencil_matrix(n, laplacian_stencil(config.p), scale=c**2 / h**2, rows=act)
        L2sq = stencil_matrix(n, squared_laplacian_stencil(), scale=c**4 / h**4, rows=act)
        Q = stencil_matrix(n, dissipation_stencil(config.p), scale=c / h, rows=act)
        params = config.dissipation_params(h, dt)
        out.append(
            GridRows(
                grid=comp,
                mode=mode,
                A=eye - w.alpha2 * z * L + w.alpha4 * z**2 * L2sq,
                B_current=2 * eye + w.beta2 * z * L - w.beta4 * z**2 * L2sq,
                B_previous=-eye + w.alpha2 * z * L - w.alpha4 * z**2 * L2sq,
                U_first=eye + 0.5 * w.beta2 * z * L - 0.5 * w.beta4 * z**2 * L2sq,
                Q=Q,
                mu=0.0 if params is None else params.nu_gamma * dt / 2.0,
            )
        )
    return out[0], out[1]


def _offsets(grid: OversetGrid1D) -> dict[Side, int]:
    return {Side.left: 0, Side.right: grid.left.n_points}


def constraint_matrix(grid: OversetGrid1D) -> tuple[list[int], FloatArray]:
    """Rows ``C U = 0`` for every non-active point, ordered left grid then right grid.

    Returns the global indices of the constrained points and ``C`` over the
    full unknown vector.
    """
    off = _offsets(grid)
    total = grid.left.n_points + grid.right.n_points
    index: list[int] = []
    rows: list[FloatArray] = []

    stencils = {(s.target_side, s.target_index): s for s in grid.stencils}
    for side in _SIDES:
        comp = grid.component(side)
        active = set(comp.active_indices)
        for j in range(comp.lo, comp.hi + 1):
            if j in active:
                continue
            row = np.zeros(total)
            g = off[side] + comp.position(j)
            row[g] = 1.0
            if j in comp.ghost_indices:
                row[off[side] + comp.position(comp.mirror(j))] += 1.0
            elif j in comp.interp_indices:
                s = stencils[(side, j)]
                donor = grid.component(s.donor_side)
                for m, wgt in zip(s.donor_indices, s.weights):
                    row[off[s.donor_side] + donor.position(m)] -= wgt
            index.append(g)
            rows.append(row)
    return index, np.array(rows)


def _dirichlet_and_ghosts(comp: ComponentGrid1D, u: npt.NDArray) -> None:
    u[comp.position(comp.boundary_index)] = 0.0
    for g in comp.ghost_indices:
        u[comp.position(g)] = -u[comp.position(comp.mirror(g))]


def _interpolate(
    grid: OversetGrid1D, fields: Sequence[npt.NDArray], targets: Sequence[Side]
) -> None:
    for s in grid.stencils:
        if s.target_side not in targets:
            continue
        donor = grid.component(s.donor_side)
        src = fields[_SIDES.index(s.donor_side)]
        lo = donor.position(s.donor_start)
        value = np.dot(s.weights, src[lo : lo + len(s.weights)])
        fields[_SIDES.index(s.target_side)][grid.component(s.target_side).position(s.target_index)] = value


def apply_constraints(grid: OversetGrid1D, fields: Sequence[npt.NDArray]) -> None:
    """Dirichlet values, then odd ghost symmetry, then interpolation, in place."""
    for comp, u in zip(grid.components, fields):
        _dirichlet_and_ghosts(comp, u)
    _interpolate(grid, fields, _SIDES)


class SpieStepper:
    """Factored stage systems for one (grid, config, dt)."""

    def __init__(self, grid: OversetGrid1D, config: SchemeConfig, dt: float):
        grid.check_explicit()
        self.grid = grid
        self.config = config
        self.dt = dt
        self.rows = stage_rows(grid, config, dt)
        self.implicit = [i for i, r in enumerate(self.rows) if r.mode is TimeMode.implicit]
        self.explicit = [i for i, r in enumerate(self.rows) if r.mode is TimeMode.explicit]
        self._assemble_implicit()

    def _assemble_implicit(self) -> None:
        """One coupled system over all points of the implicit grids."""
        self._imp_offset: dict[int, int] = {}
        size = 0
        for i in self.implicit:
            self._imp_offset[i] = size
            size += self.rows[i].grid.n_points
        self._imp_size = size
        self._imp_solver: LinearSolver | None = None
        # (row, donor grid, donor positions, weights) for interpolation from explicit grids
        self._explicit_donors: list[tuple[int, int, int, tuple[float, ...]]] = []
        if not self.implicit:
            return

        M = np.zeros((size, size))
        stencils = {(s.target_side, s.target_index): s for s in self.grid.stencils}
        for i in self.implicit:
            r, off = self.rows[i], self._imp_offset[i]
            comp = r.grid
            for k, pos in enumerate(r.active):
                M[off + pos, off : off + comp.n_points] = r.A[k]
            for j in range(comp.lo, comp.hi + 1):
                if j in comp.active_indices:
                    continue
                row = off + comp.position(j)
                M[row, row] = 1.0
                if j in comp.ghost_indices:
                    M[row, off + comp.position(comp.mirror(j))] += 1.0
                elif j in comp.interp_indices:
                    s = stencils[(_SIDES[i], j)]
                    d = _SIDES.index(s.donor_side)
                    donor = self.grid.component(s.donor_side)
                    if d in self._imp_offset:
                        for m, wgt in zip(s.donor_indices, s.weights):
                            M[row, self._imp_offset[d] + donor.position(m)] -= wgt
                    else:
                        self._explicit_donors.append(
                            (row, d, donor.position(s.donor_start), s.weights)
                        )
        self._imp_solver = LinearSolver(M, name=f"{self.config.tag} implicit grids")

    def _update(self, active_rhs: Sequence[npt.NDArray]) -> list[npt.NDArray]:
        """Stages 1 and 2 given the right-hand side at the active points of each grid."""
        new = [np.zeros(r.grid.n_points, dtype=np.result_type(rhs)) for r, rhs in zip(self.rows, active_rhs)]

        for i in self.explicit:
            new[i][self.rows[i].active] = active_rhs[i]
            _dirichlet_and_ghosts(self.rows[i].grid, new[i])

        if self._imp_solver is not None:
            dtype = np.result_type(*active_rhs)
            b = np.zeros(self._imp_size, dtype=dtype)
            for i in self.implicit:
                b[np.add(self.rows[i].active, self._imp_offset[i])] = active_rhs[i]
            for row, d, lo, weights in self._explicit_donors:
                b[row] = np.dot(weights, new[d][lo : lo + len(weights)])
            x = self._imp_solver.solve(b)
            for i in self.implicit:
                off = self._imp_offset[i]
                new[i] = x[off : off + self.rows[i].grid.n_points].astype(dtype, copy=True)

        _interpolate(self.grid, new, [_SIDES[i] for i in self.explicit])
        return new

    def step(self, current: Sequence[npt.NDArray], previous: Sequence[npt.NDArray]) -> list[npt.NDArray]:
        rhs = [r.B_current @ u + r.B_previous @ v for r, u, v in zip(self.rows, current, previous)]
        new = self._update(rhs)
        for _ in range(self.config.corrections):
            for r, u, v in zip(self.rows, new, previous):
                u[r.active] -= r.mu * (r.Q @ (u - v))
            apply_constraints(self.grid, new)
        return new

    def first_step(self, terms: FirstStepTerms) -> list[npt.NDArray]:
        """Right-hand side U_first U^0 + W/2 + (A - I)(dt u1) at the active points.

        The bracketed velocity terms carry dt u1 only; the dt^3 L_2 u1 part of W
        enters once, outside the implicit brackets.
        """
        rhs = []
        for r, u0, u1, w in zip(self.rows, terms.u0, terms.u1, terms.W):
            v = self.dt * u1
            rhs.append(r.U_first @ u0 + 0.5 * w[r.active] + r.A @ v - v[r.active])
        return self._update(rhs)


@lru_cache(maxsize=64)
def _stepper(grid: OversetGrid1D, config: SchemeConfig, dt: float) -> SpieStepper:
    return SpieStepper(grid, config, dt)


def advance_spie(state: FieldState, grid: OversetGrid1D, config: SchemeConfig) -> FieldState:
    stepper = _stepper(grid, config, state.dt)
    return state.advanced(stepper.step(state.current, state.previous))


def initial_state(
    grid: OversetGrid1D, u0: Sequence[npt.ArrayLike], u1: Sequence[npt.ArrayLike], config: SchemeConfig, dt: float
) -> FirstStepTerms:
    """First-step terms with the constraints imposed on ``u0``."""
    u0s = [np.array(u, dtype=np.result_type(np.asarray(u), np.float64)) for u in u0]
    apply_constraints(grid, u0s)
    return FirstStepTerms.build(u0s, u1, grid.spacings, config, dt)


def first_step(terms: FirstStepTerms, grid: OversetGrid1D, config: SchemeConfig, dt: float) -> FieldState:
    """Advance from t=0 to t=dt without dissipation.

    Explicit grids take the Taylor start, implicit grids solve with the same
    implicit operator as every later step.
    """
    u_1 = _stepper(grid, config, dt).first_step(terms)
    return FieldState(current=tuple(u_1), previous=terms.u0, n=1, dt=dt)
