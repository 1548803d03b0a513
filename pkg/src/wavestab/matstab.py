"""Matrix stability analysis on 1D overset grids.

The full unknown vector holds the left grid (ghosts, Dirichlet point, active,
interpolation points) followed by the right grid (interpolation points,
active, Dirichlet point, ghosts). One time step is written as

    Q0 U^(0)  = Q1 U^n + Q2 U^{n-1}              (stages 1 and 2)
    P0 U^(k)  = P1 U^(k-1) + P2 U^{n-1}          (k = 1..n_u)

which compresses to ``U^{n+1} = T1 U^n + T2 U^{n-1}`` and, after eliminating
the constrained unknowns, to ``V^{n+1} = B1 V^n + B2 V^{n-1}`` over the
active unknowns ``V``.
"""

from __future__ import annotations

import logging
import os
from collections import defaultdict
from collections.abc import Sequence
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np
import numpy.typing as npt
from scipy import linalg
from tqdm import tqdm

from .errors import ConfigError, EigenSolverError, WaveStabError
from .grid import OversetGrid1D, Side, SweepPlan, build_overset
from .stepping import FieldState, SchemeConfig, TimeMode, advance_spie
from .stepping.overset import constraint_matrix, stage_rows
from .stepping.periodic import PeriodicGrid1D, PeriodicStepper
from .stepping.solve import LinearSolver

__all__ = [
    "TOL_A",
    "COMPRESSION_TOL",
    "DEFAULT_SEED",
    "Layout",
    "StageMatrices",
    "ThreeLevelUpdate",
    "SpectrumReport",
    "SweepResult",
    "SweepReport",
    "assemble_stages",
    "assemble_periodic_stages",
    "compress",
    "spectrum",
    "verify_compression",
    "run_sweep",
    "eigenvalue_rows",
    "analyze",
]

logger = logging.getLogger(__name__)

FloatArray = npt.NDArray[np.float64]

TOL_A = 1e-8
COMPRESSION_TOL = 1e-11
EIGEN_RESIDUAL_TOL = 1e-8
DEFAULT_SEED = 20240601


@dataclass(frozen=True, kw_only=True)
class Layout:
    offsets: dict[Side, int]
    size: int
    active: tuple[int, ...]
    constrained: tuple[int, ...]

    @classmethod
    def of(cls, grid: OversetGrid1D) -> Layout:
        offsets = {Side.left: 0, Side.right: grid.left.n_points}
        active = []
        for side in (Side.left, Side.right):
            comp = grid.component(side)
            active.extend(offsets[side] + comp.position(j) for j in comp.active_indices)
        constrained, _ = constraint_matrix(grid)
        return cls(
            offsets=offsets,
            size=grid.left.n_points + grid.right.n_points,
            active=tuple(active),
            constrained=tuple(constrained),
        )

    def split(self, full: npt.NDArray) -> tuple[npt.NDArray, npt.NDArray]:
        cut = self.offsets[Side.right]
        return full[:cut].copy(), full[cut:].copy()

    def join(self, fields: Sequence[npt.NDArray]) -> npt.NDArray:
        return np.concatenate(fields)


@dataclass(frozen=True, kw_only=True)
class StageMatrices:
    Q0: FloatArray
    Q1: FloatArray
    Q2: FloatArray
    P0: FloatArray
    P1: FloatArray
    P2: FloatArray
    layout: Layout
    dt: float


def assemble_stages(
    grid: OversetGrid1D, config: SchemeConfig, dt: float | None = None
) -> StageMatrices:
    grid.check_explicit()
    dt = config.time_step(grid.spacings) if dt is None else dt
    layout = Layout.of(grid)
    n = layout.size
    Q0, Q1, Q2 = np.zeros((n, n)), np.zeros((n, n)), np.zeros((n, n))
    P0, P1, P2 = np.zeros((n, n)), np.zeros((n, n)), np.zeros((n, n))

    for side, rows in zip((Side.left, Side.right), stage_rows(grid, config, dt)):
        off = layout.offsets[side]
        cols = slice(off, off + rows.grid.n_points)
        act = np.add(rows.active, off)
        Q0[act, cols] = rows.A
        Q1[act, cols] = rows.B_current
        Q2[act, cols] = rows.B_previous
        P0[act, act] = 1.0
        P1[act, act] = 1.0
        P1[act, cols] -= rows.mu * rows.Q
        P2[act, cols] = rows.mu * rows.Q

    index, C = constraint_matrix(grid)
    Q0[index] = C
    P0[index] = C
    return StageMatrices(Q0=Q0, Q1=Q1, Q2=Q2, P0=P0, P1=P1, P2=P2, layout=layout, dt=dt)


def assemble_periodic_stages(
    grid: PeriodicGrid1D,
    config: SchemeConfig,
    dt: float | None = None,
    mode: TimeMode = TimeMode.implicit,
) -> StageMatrices:
    """Stage matrices of a single periodic grid, where every unknown is active."""
    dt = config.cfl * grid.h / config.c if dt is None else dt
    st = PeriodicStepper(grid, config, dt, mode)
    n = grid.n
    eye = np.eye(n)
    layout = Layout(offsets={Side.left: 0, Side.right: n}, size=n, active=tuple(range(n)), constrained=())
    return StageMatrices(
        Q0=st.A,
        Q1=st.B_current,
        Q2=st.B_previous,
        P0=eye,
        P1=eye - st.mu * st.Q,
        P2=st.mu * st.Q,
        layout=layout,
        dt=dt,
    )


@dataclass(frozen=True, kw_only=True)
class ThreeLevelUpdate:
    T1: FloatArray
    T2: FloatArray
    B1: FloatArray
    B2: FloatArray
    extension: FloatArray
    """Full vector from active unknowns, U = E V"""
    layout: Layout
    dt: float


def compress(stages: StageMatrices, n_u: int) -> ThreeLevelUpdate:
    q0 = LinearSolver(stages.Q0, name="Q0")
    T1 = q0.solve(stages.Q1)
    T2 = q0.solve(stages.Q2)
    if n_u > 0:
        p0 = LinearSolver(stages.P0, name="P0")
        S = p0.solve(stages.P1)
        G = p0.solve(stages.P2)
        for _ in range(n_u):
            T1 = S @ T1
            T2 = S @ T2 + G

    lay = stages.layout
    a, c = list(lay.active), list(lay.constrained)
    E = np.zeros((lay.size, len(a)))
    E[a, np.arange(len(a))] = 1.0
    if c:
        C = stages.Q0[c]
        E[c] = -LinearSolver(C[:, c], name="constraint block").solve(C[:, a])

    return ThreeLevelUpdate(
        T1=T1, T2=T2, B1=T1[a] @ E, B2=T2[a] @ E, extension=E, layout=lay, dt=stages.dt
    )


@dataclass(frozen=True, kw_only=True)
class SpectrumReport:
    eigenvalues: npt.NDArray[np.complex128]
    max_modulus: float
    unstable_count: int
    tol_a: float = TOL_A
    max_residual: float


def spectrum(update: ThreeLevelUpdate | tuple[FloatArray, FloatArray], tol_a: float = TOL_A) -> SpectrumReport:
    """Eigenvalues a of a^2 V = a B1 V + B2 V via the companion matrix [[0, I], [B2, B1]]."""
    B1, B2 = (update.B1, update.B2) if isinstance(update, ThreeLevelUpdate) else update
    n = B1.shape[0]
    if B1.shape != (n, n) or B2.shape != (n, n):
        raise ConfigError(f"B1 and B2 must be square of the same size, got {B1.shape}, {B2.shape}")
    companion = np.block([[np.zeros((n, n)), np.eye(n)], [B2, B1]])
    try:
        vals, vecs = linalg.eig(companion)
    except (linalg.LinAlgError, ValueError) as e:
        raise EigenSolverError(f"eigensolver failed on the {2 * n}x{2 * n} companion matrix: {e}") from e

    v0 = vecs[:n]
    residual = (vals**2) * v0 - vals * (B1 @ v0) - B2 @ v0
    norms = np.linalg.norm(v0, axis=0)
    norms[norms == 0] = 1.0
    max_residual = float(np.max(np.linalg.norm(residual, axis=0) / norms))
    if max_residual > EIGEN_RESIDUAL_TOL:
        logger.warning("quadratic eigen-residual %.2e exceeds %.0e", max_residual, EIGEN_RESIDUAL_TOL)

    moduli = np.abs(vals)
    return SpectrumReport(
        eigenvalues=vals,
        max_modulus=float(moduli.max()),
        unstable_count=int(np.count_nonzero(moduli > 1.0 + tol_a)),
        tol_a=tol_a,
        max_residual=max_residual,
    )


def analyze(grid: OversetGrid1D, config: SchemeConfig, tol_a: float = TOL_A) -> SpectrumReport:
    return spectrum(compress(assemble_stages(grid, config), config.corrections), tol_a)


def verify_compression(
    grid: OversetGrid1D,
    config: SchemeConfig,
    n_steps: int = 20,
    seed: int = DEFAULT_SEED,
    *,
    zero: bool = False,
) -> float:
    """Max relative deviation between time stepping and the B1/B2 recurrence."""
    update = compress(assemble_stages(grid, config), config.corrections)
    lay = update.layout
    n_active = len(lay.active)
    if zero:
        v_prev, v_cur = np.zeros(n_active), np.zeros(n_active)
    else:
        rng = np.random.default_rng(seed)
        v_prev, v_cur = rng.uniform(-1.0, 1.0, (2, n_active))

    state = FieldState(
        current=lay.split(update.extension @ v_cur),
        previous=lay.split(update.extension @ v_prev),
        n=1,
        dt=update.dt,
    )
    active = list(lay.active)
    deviation = 0.0
    for _ in range(n_steps):
        state = advance_spie(state, grid, config)
        v_prev, v_cur = v_cur, update.B1 @ v_cur + update.B2 @ v_prev
        stepped = lay.join(state.current)[active]
        scale = float(np.max(np.abs(v_cur)))
        diff = float(np.max(np.abs(stepped - v_cur)))
        deviation = max(deviation, diff / scale if scale > 0 else diff)
    return deviation


@dataclass(frozen=True, kw_only=True)
class SweepResult:
    scheme: str
    p: int
    delta: float
    gamma: float
    n_u: int
    s_f: float
    n_left: int
    max_modulus: float
    unstable_count: int
    error: str | None = None

    @property
    def stable(self) -> bool:
        return self.error is None and self.unstable_count == 0


@dataclass(frozen=True, kw_only=True)
class SweepReport:
    results: list[SweepResult]
    gammas: tuple[float, ...]
    deviations: list[tuple[float, float, float]] = field(default_factory=list)
    """(delta, gamma, deviation) of the compression spot checks"""

    def unstable_grids(self) -> dict[float, int]:
        counts = {g: 0 for g in self.gammas}
        for r in self.results:
            if r.error is None and r.unstable_count > 0:
                counts[r.gamma] += 1
        return counts

    def failed_cells(self) -> dict[float, int]:
        counts = {g: 0 for g in self.gammas}
        for r in self.results:
            if r.error is not None:
                counts[r.gamma] += 1
        return counts

    def count_rows(self) -> list[tuple[float, int, int, int]]:
        """(gamma, unstable grids, grids, failed cells)."""
        unstable, failed = self.unstable_grids(), self.failed_cells()
        n_grids = len({r.delta for r in self.results})
        return [(g, unstable[g], n_grids, failed[g]) for g in self.gammas]


def _sweep_delta(
    delta: float, config: SchemeConfig, gammas: tuple[float, ...], n_right: int
) -> list[SweepResult]:
    def result(gamma: float, **kw) -> SweepResult:
        return SweepResult(
            scheme=config.tag,
            p=config.p,
            delta=delta,
            gamma=gamma,
            n_u=config.n_u,
            s_f=config.safety_factor,
            **kw,
        )

    try:
        grid = build_overset(delta, n_right, config.p)
    except WaveStabError as e:
        logger.warning("delta=%.6g: %s", delta, e)
        return [result(g, n_left=0, max_modulus=float("nan"), unstable_count=0, error=str(e)) for g in gammas]

    out = []
    for gamma in gammas:
        try:
            report = analyze(grid, replace(config, gamma=gamma))
        except (WaveStabError, np.linalg.LinAlgError) as e:
            logger.warning("delta=%.6g gamma=%.3g: %s", delta, gamma, e)
            out.append(result(gamma, n_left=grid.left.n_active, max_modulus=float("nan"), unstable_count=0, error=str(e)))
            continue
        out.append(
            result(
                gamma,
                n_left=grid.left.n_active,
                max_modulus=report.max_modulus,
                unstable_count=report.unstable_count,
            )
        )
    return out


def _check_monotone(results: Sequence[SweepResult], tol: float = TOL_A) -> None:
    by_delta: dict[float, dict[float, SweepResult]] = defaultdict(dict)
    for r in results:
        by_delta[r.delta][r.gamma] = r
    for delta, cells in by_delta.items():
        lo, hi = cells.get(0.0), cells.get(1.0)
        if lo is None or hi is None or lo.error or hi.error:
            continue
        if hi.unstable_count > 0 and hi.max_modulus > lo.max_modulus + tol:
            logger.warning(
                "delta=%.6g: max|a| grows from %.10g at gamma=0 to %.10g at gamma=1",
                delta,
                lo.max_modulus,
                hi.max_modulus,
            )


def run_sweep(
    plan: SweepPlan,
    config: SchemeConfig,
    n_right: int = 10,
    *,
    jobs: int | None = 1,
    seed: int = DEFAULT_SEED,
    verify_cells: int = 5,
    progress: bool = True,
) -> SweepReport:
    """Stability verdict for every (delta, gamma) cell of ``plan``."""
    deltas = [float(d) for d in plan.deltas]
    gammas = tuple(float(g) for g in plan.gamma_values)
    if jobs is None:
        jobs = os.cpu_count() or 1

    results: list[SweepResult] = []
    desc = f"{config.tag} sweep"
    if jobs > 1 and len(deltas) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            chunks = pool.map(
                _sweep_delta,
                deltas,
                [config] * len(deltas),
                [gammas] * len(deltas),
                [n_right] * len(deltas),
            )
            for chunk in tqdm(chunks, total=len(deltas), desc=desc, disable=not progress):
                results.extend(chunk)
    else:
        for delta in tqdm(deltas, desc=desc, disable=not progress):
            results.extend(_sweep_delta(delta, config, gammas, n_right))

    _check_monotone(results)
    report = SweepReport(results=results, gammas=gammas)
    _spot_check(report, config, n_right, seed, verify_cells)
    return report


def _spot_check(
    report: SweepReport, config: SchemeConfig, n_right: int, seed: int, n_cells: int
) -> None:
    candidates = [r for r in report.results if r.error is None]
    if not candidates or n_cells <= 0:
        return
    rng = np.random.default_rng(seed)
    picks = rng.choice(len(candidates), size=min(n_cells, len(candidates)), replace=False)
    for i in sorted(picks):
        cell = candidates[int(i)]
        grid = build_overset(cell.delta, n_right, config.p)
        dev = verify_compression(grid, replace(config, gamma=cell.gamma), seed=seed)
        report.deviations.append((cell.delta, cell.gamma, dev))
        if dev > COMPRESSION_TOL:
            logger.warning(
                "compression check delta=%.6g gamma=%.3g deviates by %.2e", cell.delta, cell.gamma, dev
            )


def eigenvalue_rows(report: SpectrumReport) -> list[tuple[float, float, float]]:
    """Rows (re, im, |a|) sorted by decreasing modulus."""
    order = np.argsort(-np.abs(report.eigenvalues), kind="stable")
    return [
        (float(a.real), float(a.imag), float(abs(a))) for a in report.eigenvalues[order]
    ]
