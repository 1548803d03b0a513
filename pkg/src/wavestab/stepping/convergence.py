"""Grid refinement studies against the standing-wave solution on [-1, 1]."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np
import numpy.typing as npt
from tqdm import tqdm

from ..grid import OversetGrid1D, build_overset
from .config import SchemeConfig
from .overset import advance_spie, first_step, initial_state

__all__ = [
    "standing_wave",
    "StepRecord",
    "ConvergenceRecord",
    "simulate_standing_wave",
    "run_convergence",
]

logger = logging.getLogger(__name__)


def standing_wave(x: npt.ArrayLike, t: float, mode: int, c: float = 1.0) -> npt.NDArray[np.float64]:
    """u = sin(m pi (x+1)/2) cos(c m pi t/2), zero at both ends of [-1, 1]."""
    x = np.asarray(x, dtype=np.float64)
    return np.sin(mode * np.pi * (x + 1.0) / 2.0) * np.cos(c * mode * np.pi * t / 2.0)


@dataclass(frozen=True, kw_only=True)
class StepRecord:
    n: int
    t: float
    max_norm: float
    error: float | None
    """Max-norm error over the active points, when an exact solution is known"""


@dataclass(frozen=True, kw_only=True)
class ConvergenceRecord:
    level: int
    n_right: int
    n_left: int
    dt: float
    n_steps: int
    error: float
    order: float | None
    """log2 of the error ratio to the previous level"""
    history: tuple[StepRecord, ...] = field(default=(), repr=False)


def _active_values(grid: OversetGrid1D, fields) -> tuple[np.ndarray, np.ndarray]:
    xs, us = [], []
    for comp, u in zip(grid.components, fields):
        sl = comp.active_slice
        xs.append(comp.coords[sl])
        us.append(u[sl])
    return np.concatenate(xs), np.concatenate(us)


def simulate_standing_wave(
    grid: OversetGrid1D,
    config: SchemeConfig,
    mode: int,
    dt: float,
    n_steps: int,
    *,
    progress: bool = False,
) -> list[StepRecord]:
    c = config.c
    u0 = [standing_wave(comp.coords, 0.0, mode, c) for comp in grid.components]
    u1 = [np.zeros(comp.n_points) for comp in grid.components]
    terms = initial_state(grid, u0, u1, config, dt)

    def record(state) -> StepRecord:
        x, u = _active_values(grid, state.current)
        exact = standing_wave(x, state.t, mode, c)
        return StepRecord(
            n=state.n,
            t=state.t,
            max_norm=float(np.max(np.abs(u))),
            error=float(np.max(np.abs(u - exact))),
        )

    state = first_step(terms, grid, config, dt)
    history = [record(state)]
    for _ in tqdm(range(1, n_steps), desc=f"{config.tag} N_R={grid.right.n_active}", disable=not progress, leave=False):
        state = advance_spie(state, grid, config)
        history.append(record(state))
    return history


def run_convergence(
    mode: int,
    delta: float,
    config: SchemeConfig,
    t_final: float = 1.0,
    *,
    levels: int = 3,
    n_right: int = 10,
    progress: bool = False,
) -> list[ConvergenceRecord]:
    """Max-norm errors at ``t_final`` on ``levels`` grids, halving h and dt together."""
    records: list[ConvergenceRecord] = []
    for level in range(levels):
        nr = n_right * 2**level
        grid = build_overset(delta, nr, config.p)
        n_steps = max(2, math.ceil(t_final / config.time_step(grid.spacings) - 1e-9))
        dt = t_final / n_steps
        history = simulate_standing_wave(grid, config, mode, dt, n_steps, progress=progress)
        error = history[-1].error or 0.0

        order = None
        if records and records[-1].error > 0 and error > 0:
            order = math.log2(records[-1].error / error)
        records.append(
            ConvergenceRecord(
                level=level,
                n_right=nr,
                n_left=grid.left.n_active,
                dt=dt,
                n_steps=n_steps,
                error=error,
                order=order,
                history=tuple(history),
            )
        )
        logger.info("level %d: N_R=%d dt=%.4g error=%.3e order=%s", level, nr, dt, error, order)
    return records
