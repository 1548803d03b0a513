"""One-dimensional overset grids on [-1, 1].

Two uniform component grids overlap in the middle of the domain. The right
grid is fixed on [0.5, 1]; the left grid starts at -1 and is extended just far
enough for its domain to reach past 0.5 and for every interpolation point of
both grids to have a full Lagrange donor stencil of active points on the
other grid.

Index conventions (``N`` is the number of active points):

* left grid:  ghosts ``-n_ghost..-1``, Dirichlet point ``0``, active ``1..N``,
  interpolation points ``N+1..N+n_ghost``.
* right grid: interpolation points ``-n_ghost..-1``, active ``0..N-1``,
  Dirichlet point ``N``, ghosts ``N+1..N+n_ghost``.
"""

from __future__ import annotations

import json
import math
from collections.abc import Sequence
from dataclasses import asdict, dataclass, field
from enum import StrEnum

import numpy as np
import numpy.typing as npt

from .errors import (
    ConfigError,
    DegenerateStencilError,
    ExplicitInterpolationError,
    InfeasibleOverlapError,
)

__all__ = [
    "Side",
    "BoundaryKind",
    "ghost_count",
    "ComponentGrid1D",
    "InterpStencil",
    "OversetGrid1D",
    "SweepPlan",
    "build_overset",
    "lagrange_weights",
    "enumerate_grids",
]

RIGHT_X0 = 0.5
RIGHT_X1 = 1.0
LEFT_X0 = -1.0
INDEX_TOL = 1e-9


class Side(StrEnum):
    left = "left"
    right = "right"

    @property
    def other(self) -> Side:
        return Side.right if self is Side.left else Side.left


class BoundaryKind(StrEnum):
    dirichlet = "dirichlet"


def ghost_count(p: int) -> int:
    return p // 2 + 1


def _check_order(p: int) -> None:
    if p not in (2, 4):
        raise ConfigError(f"order p must be 2 or 4, got {p}")


@dataclass(frozen=True, kw_only=True)
class ComponentGrid1D:
    side: Side
    x0: float
    """Physical coordinate of index 0"""
    h: float
    """Uniform grid spacing"""
    n_active: int
    """Number of active points (N_L or N_R)"""
    n_ghost: int
    """Ghost points beyond the Dirichlet point, also the number of interpolation points"""
    boundary: BoundaryKind = BoundaryKind.dirichlet

    def __post_init__(self):
        if self.h <= 0:
            raise ConfigError(f"grid spacing must be positive, got {self.h}")
        if self.n_active < 1:
            raise ConfigError(f"need at least one active point, got {self.n_active}")

    @property
    def lo(self) -> int:
        return -self.n_ghost

    @property
    def hi(self) -> int:
        return self.n_active + self.n_ghost

    @property
    def n_points(self) -> int:
        return self.hi - self.lo + 1

    @property
    def boundary_index(self) -> int:
        return 0 if self.side is Side.left else self.n_active

    @property
    def active_indices(self) -> range:
        if self.side is Side.left:
            return range(1, self.n_active + 1)
        return range(0, self.n_active)

    @property
    def ghost_indices(self) -> range:
        if self.side is Side.left:
            return range(-self.n_ghost, 0)
        return range(self.n_active + 1, self.n_active + self.n_ghost + 1)

    @property
    def interp_indices(self) -> range:
        if self.side is Side.left:
            return range(self.n_active + 1, self.n_active + self.n_ghost + 1)
        return range(-self.n_ghost, 0)

    @property
    def donor_range(self) -> tuple[int, int]:
        """Inclusive index range that may donate to the other grid, the active points."""
        r = self.active_indices
        return r.start, r.stop - 1

    def mirror(self, g: int) -> int:
        """Active index reflected through the Dirichlet point."""
        return 2 * self.boundary_index - g

    def x(self, j: int) -> float:
        return self.x0 + j * self.h

    def position(self, j: int) -> int:
        """Offset of index ``j`` in a grid function array."""
        return j - self.lo

    def fractional_index(self, x: float) -> float:
        return (x - self.x0) / self.h

    @property
    def coords(self) -> npt.NDArray[np.float64]:
        return self.x0 + np.arange(self.lo, self.hi + 1) * self.h

    @property
    def active_slice(self) -> slice:
        r = self.active_indices
        return slice(self.position(r.start), self.position(r.stop - 1) + 1)

    def zeros(self) -> npt.NDArray[np.float64]:
        return np.zeros(self.n_points)


@dataclass(frozen=True, kw_only=True)
class InterpStencil:
    target_side: Side
    target_index: int
    donor_side: Side
    donor_start: int
    """Left-most donor index m_k"""
    weights: tuple[float, ...]

    @property
    def donor_indices(self) -> range:
        return range(self.donor_start, self.donor_start + len(self.weights))


@dataclass(frozen=True, kw_only=True)
class OversetGrid1D:
    left: ComponentGrid1D
    right: ComponentGrid1D
    delta: float
    """Grid spacing ratio h_L / h_R"""
    b_left: float
    """Right end of the left grid's physical domain"""
    p: int
    stencils: tuple[InterpStencil, ...]

    def component(self, side: Side) -> ComponentGrid1D:
        return self.left if side is Side.left else self.right

    @property
    def components(self) -> tuple[ComponentGrid1D, ComponentGrid1D]:
        return self.left, self.right

    @property
    def spacings(self) -> tuple[float, float]:
        return self.left.h, self.right.h

    def stencils_for(self, side: Side) -> tuple[InterpStencil, ...]:
        return tuple(s for s in self.stencils if s.target_side is side)

    def check_explicit(self) -> None:
        """Raise if any stencil draws on an interpolation point of its donor grid."""
        for s in self.stencils:
            donor = self.component(s.donor_side)
            clash = set(s.donor_indices) & set(donor.interp_indices)
            if clash:
                raise ExplicitInterpolationError(
                    f"{s.target_side} point {s.target_index} uses interpolation "
                    f"points {sorted(clash)} of the {s.donor_side} grid"
                )

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self, indent: int | None = 2) -> str:
        return json.dumps(self.to_dict(), indent=indent)


@dataclass(frozen=True, kw_only=True)
class SweepPlan:
    delta_min: float = 0.25
    delta_max: float = 2.0
    n_delta: int = 101
    gamma_values: tuple[float, ...] = field(
        default_factory=lambda: tuple(round(0.1 * i, 10) for i in range(11))
    )

    def __post_init__(self):
        if self.n_delta < 1:
            raise ConfigError(f"n_delta must be at least 1, got {self.n_delta}")
        if self.delta_min <= 0 or self.delta_min > self.delta_max:
            raise ConfigError(
                f"need 0 < delta_min <= delta_max, got [{self.delta_min}, {self.delta_max}]"
            )
        if not self.gamma_values:
            raise ConfigError("gamma_values is empty")
        if any(g < 0 or g > 1 for g in self.gamma_values):
            raise ConfigError(f"gamma values must lie in [0, 1], got {self.gamma_values}")

    @property
    def deltas(self) -> npt.NDArray[np.float64]:
        return np.linspace(self.delta_min, self.delta_max, self.n_delta)


def lagrange_weights(donor_coords: Sequence[float], x: float) -> tuple[float, ...]:
    """Lagrange interpolation weights of ``donor_coords`` evaluated at ``x``."""
    nodes = np.asarray(donor_coords, dtype=np.float64)
    gaps = np.diff(nodes)
    if np.any(gaps <= 0):
        raise DegenerateStencilError(
            f"donor coordinates must be strictly increasing, got {nodes.tolist()}"
        )
    scale = float(gaps.min())
    hit = np.flatnonzero(np.abs(nodes - x) <= 1e-12 * max(scale, abs(x), 1.0))
    if hit.size:
        unit = [0.0] * nodes.size
        unit[int(hit[0])] = 1.0
        return tuple(unit)

    weights = []
    for j, xj in enumerate(nodes):
        others = np.delete(nodes, j)
        weights.append(float(np.prod((x - others) / (xj - others))))
    return tuple(weights)


def _stencil(
    target: ComponentGrid1D, k: int, donor: ComponentGrid1D, p: int
) -> InterpStencil | None:
    x = target.x(k)
    s = donor.fractional_index(x)
    d_lo, d_hi = donor.donor_range
    if d_hi - d_lo < p or s < d_lo - INDEX_TOL or s > d_hi + INDEX_TOL:
        return None
    start = min(max(math.floor(s + INDEX_TOL) - p // 2, d_lo), d_hi - p)
    coords = [donor.x(start + m) for m in range(p + 1)]
    return InterpStencil(
        target_side=target.side,
        target_index=k,
        donor_side=donor.side,
        donor_start=start,
        weights=lagrange_weights(coords, x),
    )


def _all_stencils(
    left: ComponentGrid1D, right: ComponentGrid1D, p: int
) -> tuple[InterpStencil, ...] | None:
    """Donor stencils of both grids, or None when the two domains do not overlap
    or some interpolation point falls outside the active points of the other grid."""
    if left.x(left.n_active) - RIGHT_X0 <= INDEX_TOL * right.h:
        return None
    stencils = []
    for target, donor in ((left, right), (right, left)):
        for k in target.interp_indices:
            s = _stencil(target, k, donor, p)
            if s is None:
                return None
            stencils.append(s)
    return tuple(stencils)


def build_overset(delta: float, n_right: int, p: int) -> OversetGrid1D:
    """Build the minimal-overlap overset grid for spacing ratio ``delta``."""
    _check_order(p)
    if delta <= 0:
        raise ConfigError(f"delta must be positive, got {delta}")
    if n_right < p + 2:
        raise ConfigError(f"n_right must be at least p+2={p + 2}, got {n_right}")

    n_ghost = ghost_count(p)
    h_right = (RIGHT_X1 - RIGHT_X0) / n_right
    h_left = delta * h_right
    right = ComponentGrid1D(
        side=Side.right, x0=RIGHT_X0, h=h_right, n_active=n_right, n_ghost=n_ghost
    )

    for n_left in range(p, math.ceil(2.5 / h_left) + 1):
        left = ComponentGrid1D(
            side=Side.left, x0=LEFT_X0, h=h_left, n_active=n_left, n_ghost=n_ghost
        )
        stencils = _all_stencils(left, right, p)
        if stencils is None:
            continue
        grid = OversetGrid1D(
            left=left,
            right=right,
            delta=delta,
            b_left=LEFT_X0 + delta * h_right * n_left,
            p=p,
            stencils=stencils,
        )
        grid.check_explicit()
        return grid

    raise InfeasibleOverlapError(
        f"no left grid with delta={delta}, n_right={n_right}, p={p} overlaps the right grid "
        "with explicit interpolation"
    )


def enumerate_grids(plan: SweepPlan, n_right: int, p: int) -> list[OversetGrid1D]:
    return [build_overset(float(d), n_right, p) for d in plan.deltas]
