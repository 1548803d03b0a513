from __future__ import annotations

import json
import logging
import os
from collections.abc import Iterator
from contextlib import contextmanager
from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path
from typing import Any

import numpy as np
import typer
from rich.console import Console
from rich.table import Table

from ._logging import console as err_console
from ._logging import setup_logging
from .errors import ConfigError, GridError, HaloError, NumericalError
from .grid import SweepPlan, build_overset
from .matstab import (
    COMPRESSION_TOL,
    DEFAULT_SEED,
    TOL_A,
    analyze,
    eigenvalue_rows,
    run_sweep,
    verify_compression,
)
from .output import Column, write_csv
from .stepping import SchemeConfig, parse_scheme, run_convergence
from .symbols import (
    AmpScheme,
    SymbolConfig,
    amplification_surface,
    gks_check,
    stability_region,
    verify_unconditional,
)

__all__ = ["app", "RunConfig", "parse_float_list"]

logger = logging.getLogger(__name__)

console = Console()

app = typer.Typer(
    help="Modified-equation schemes for the wave equation and their stability on 1D overset grids.",
    no_args_is_help=True,
    add_completion=False,
)

DEFAULT_GAMMAS = "0,0.1,...,1"


def parse_float_list(text: str) -> tuple[float, ...]:
    """Parse ``"0.1,0.5"`` or an arithmetic range written ``"0,0.1,...,1"``."""
    tokens = [t.strip() for t in text.split(",") if t.strip()]
    if not tokens:
        raise ConfigError("empty value list")
    if "..." not in tokens:
        try:
            return tuple(float(t) for t in tokens)
        except ValueError as e:
            raise ConfigError(f"bad number list {text!r}") from e
    if len(tokens) != 4 or tokens[2] != "...":
        raise ConfigError(f"ranges are written 'first,second,...,last', got {text!r}")
    first, second, last = float(tokens[0]), float(tokens[1]), float(tokens[3])
    step = second - first
    if step == 0 or (last - first) / step < 0:
        raise ConfigError(f"range {text!r} does not reach its last value")
    n = int(round((last - first) / step))
    return tuple(round(first + i * step, 12) for i in range(n + 1))


@dataclass(kw_only=True)
class RunConfig:
    command: str
    scheme: str = "SPIE2"
    p: int = 2
    """Order of the symbol and region commands, schemes carry their own"""
    alpha2: float = 0.25
    alpha4: float = 1.0 / 12.0
    alpha2_values: tuple[float, ...] = ()
    alpha4_values: tuple[float, ...] = ()
    amp_scheme: str = "IME"
    nu: float = 0.0
    n_k: int = 256
    n_z: int = 64
    n_theta: int = 10_000
    gammas: tuple[float, ...] = (1.0,)
    n_u: int | None = None
    """Dissipation corrections, case default when unset"""
    s_f: float | None = None
    cfl: float | None = None
    delta: float = 1.0
    delta_min: float = 0.25
    delta_max: float = 2.0
    n_delta: int = 101
    n_right: int = 10
    n_steps: int = 20
    t_final: float = 1.0
    mode: int = 2
    levels: int = 3
    seed: int = DEFAULT_SEED
    jobs: int = 1
    out: Path = Path("run")

    def override(self, path: Path | None) -> RunConfig:
        """Values of a JSON object in ``path`` take precedence over the flags."""
        if path is None:
            return self
        try:
            data = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as e:
            raise ConfigError(f"cannot read config {path}: {e}") from e
        if not isinstance(data, dict):
            raise ConfigError(f"config {path} must hold a JSON object")
        known = {f.name for f in fields(self)} - {"command"}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        for name in ("gammas", "alpha2_values", "alpha4_values"):
            if name in data:
                data[name] = tuple(float(v) for v in data[name])
        if "out" in data:
            data["out"] = Path(data["out"])
        return replace(self, **data)

    def symbol_config(self) -> SymbolConfig:
        try:
            scheme = AmpScheme(self.amp_scheme)
        except ValueError as e:
            raise ConfigError(f"unknown amplification scheme {self.amp_scheme!r}") from e
        return SymbolConfig(
            p=self.p,
            alpha2=self.alpha2,
            alpha4=self.alpha4,
            scheme=scheme,
            nu_p=self.nu,
            n_u=1 if self.n_u is None else self.n_u,
        )

    def scheme_config(self, gamma: float | None = None) -> SchemeConfig:
        case, p = parse_scheme(self.scheme)
        return SchemeConfig.for_case(
            case,
            p,
            alpha2=self.alpha2,
            alpha4=self.alpha4,
            gamma=self.gammas[0] if gamma is None else gamma,
            n_u=self.n_u,
            s_f=self.s_f,
            cfl=self.cfl,
        )

    def plan(self) -> SweepPlan:
        return SweepPlan(
            delta_min=self.delta_min,
            delta_max=self.delta_max,
            n_delta=self.n_delta,
            gamma_values=self.gammas,
        )

    def to_dict(self) -> dict[str, Any]:
        out = asdict(self)
        out["out"] = str(self.out)
        out["gammas"] = list(self.gammas)
        return out


@contextmanager
def _exit_codes() -> Iterator[None]:
    try:
        yield
    except (ConfigError, GridError, HaloError) as e:
        err_console.print(f"error: {e}", style="red", markup=False)
        raise typer.Exit(code=2) from e
    except NumericalError as e:
        err_console.print(f"numerical failure: {e}", style="red", markup=False)
        raise typer.Exit(code=1) from e


@app.callback()
def main(
    verbose: bool = typer.Option(False, "--verbose", "-v", help="Log at DEBUG level"),
):
    setup_logging(verbose)


@app.command()
def sweep(
    scheme: str = typer.Option("EME2", help="EME2, EME4, IME2, IME4, SPIE2 or SPIE4"),
    gamma: str = typer.Option(DEFAULT_GAMMAS, help="Dissipation scales, list or 'a,b,...,c'"),
    delta_min: float = typer.Option(0.25, help="Smallest spacing ratio h_L/h_R"),
    delta_max: float = typer.Option(2.0, help="Largest spacing ratio h_L/h_R"),
    n_delta: int = typer.Option(101, help="Number of grids in the sweep"),
    nr: int = typer.Option(10, help="Active points N_R on the right grid"),
    n_u: int | None = typer.Option(None, help="Dissipation corrections per step"),
    s_f: float | None = typer.Option(None, help="Safety factor of nu_p"),
    cfl: float | None = typer.Option(None, help="CFL number on the reference grid"),
    alpha2: float = typer.Option(0.25),
    alpha4: float = typer.Option(1.0 / 12.0),
    jobs: int = typer.Option(os.cpu_count() or 1, help="Worker processes"),
    seed: int = typer.Option(DEFAULT_SEED, envvar="WAVESTAB_SEED"),
    out: Path = typer.Option(Path("run"), help="Output directory"),
    config: Path | None = typer.Option(None, help="JSON file overriding the flags"),
):
    """Unstable-grid counts over a delta-gamma sweep."""
    with _exit_codes():
        run = RunConfig(
            command="sweep",
            scheme=scheme,
            gammas=parse_float_list(gamma),
            delta_min=delta_min,
            delta_max=delta_max,
            n_delta=n_delta,
            n_right=nr,
            n_u=n_u,
            s_f=s_f,
            cfl=cfl,
            alpha2=alpha2,
            alpha4=alpha4,
            jobs=jobs,
            seed=seed,
            out=out,
        ).override(config)
        scheme_cfg = run.scheme_config()
        report = run_sweep(run.plan(), scheme_cfg, run.n_right, jobs=run.jobs, seed=run.seed)

        meta = run.to_dict() | {"scheme_config": scheme_cfg.to_dict()}
        stem = f"sweep_{scheme_cfg.tag}_nu{scheme_cfg.n_u}"
        write_csv(
            run.out / f"{stem}.csv",
            SWEEP_COLUMNS,
            (
                (
                    r.scheme,
                    r.p,
                    r.delta,
                    r.gamma,
                    r.n_u,
                    r.s_f,
                    r.stable,
                    r.max_modulus,
                    r.unstable_count,
                    r.n_left,
                    r.error,
                )
                for r in report.results
            ),
            config=meta,
        )
        rows = report.count_rows()
        write_csv(run.out / f"{stem}_counts.csv", COUNT_COLUMNS, rows, config=meta)

        table = Table(title=f"{scheme_cfg.tag}, n_u={scheme_cfg.n_u}, s_f={scheme_cfg.safety_factor}")
        table.add_column("gamma", justify="right")
        table.add_column("unstable grids", justify="right")
        table.add_column("failed", justify="right")
        for g, n_unstable, n_grids, n_failed in rows:
            table.add_row(f"{g:.2f}", f"{n_unstable}/{n_grids}", str(n_failed))
        console.print(table)


SWEEP_COLUMNS = [
    Column("scheme", "scheme tag, e.g. SPIE2"),
    Column("p", "order of accuracy"),
    Column("delta", "grid spacing ratio h_L/h_R"),
    Column("gamma", "dissipation scale, nu_gamma = gamma nu_p"),
    Column("n_u", "dissipation corrections per step"),
    Column("s_f", "safety factor of nu_p"),
    Column("stable", "no eigenvalue with |a| > 1 + tol_a"),
    Column("max_modulus", "largest |a| of the three-level update"),
    Column("unstable_count", f"eigenvalues with |a| > 1 + {TOL_A:g}"),
    Column("n_left", "active points on the left grid"),
    Column("error", "failure message, empty on success"),
]

COUNT_COLUMNS = [
    Column("gamma", "dissipation scale"),
    Column("n_unstable_grids", "grids with at least one unstable eigenvalue"),
    Column("n_grids", "grids in the sweep"),
    Column("n_failed", "cells that raised an error"),
]


@app.command()
def converge(
    scheme: str = typer.Option("SPIE2", help="EME2, EME4, IME2, IME4, SPIE2 or SPIE4"),
    mode: int = typer.Option(2, help="Standing-wave mode number m"),
    levels: int = typer.Option(3, help="Refinement levels"),
    delta: float = typer.Option(0.8, help="Grid spacing ratio h_L/h_R"),
    t_final: float = typer.Option(1.0, help="Final time"),
    nr: int = typer.Option(10, help="N_R on the coarsest level"),
    gamma: float = typer.Option(1.0, help="Dissipation scale"),
    n_u: int | None = typer.Option(None),
    s_f: float | None = typer.Option(None),
    cfl: float | None = typer.Option(None),
    alpha2: float = typer.Option(0.25),
    alpha4: float = typer.Option(1.0 / 12.0),
    out: Path = typer.Option(Path("run"), help="Output directory"),
    config: Path | None = typer.Option(None, help="JSON file overriding the flags"),
):
    """Errors and observed orders against the exact standing wave."""
    with _exit_codes():
        run = RunConfig(
            command="converge",
            scheme=scheme,
            mode=mode,
            levels=levels,
            delta=delta,
            t_final=t_final,
            n_right=nr,
            gammas=(gamma,),
            n_u=n_u,
            s_f=s_f,
            cfl=cfl,
            alpha2=alpha2,
            alpha4=alpha4,
            out=out,
        ).override(config)
        if run.levels < 1:
            raise ConfigError(f"need at least one level, got {run.levels}")
        scheme_cfg = run.scheme_config()
        records = run_convergence(
            run.mode, run.delta, scheme_cfg, run.t_final, levels=run.levels, n_right=run.n_right
        )
        meta = run.to_dict() | {"scheme_config": scheme_cfg.to_dict()}
        stem = f"converge_{scheme_cfg.tag}_m{run.mode}"
        write_csv(
            run.out / f"{stem}.csv",
            [
                Column("level", "refinement level, 0 is coarsest"),
                Column("n_right", "active points on the right grid"),
                Column("n_left", "active points on the left grid"),
                Column("dt", "time step"),
                Column("n_steps", "steps to t_final"),
                Column("error", "max-norm error over active points at t_final"),
                Column("order", "log2 of the error ratio to the previous level"),
            ],
            ((r.level, r.n_right, r.n_left, r.dt, r.n_steps, r.error, r.order) for r in records),
            config=meta,
        )
        write_csv(
            run.out / f"{stem}_history.csv",
            [
                Column("n", "time level"),
                Column("t", "time"),
                Column("max_norm", "max |U| over active points"),
                Column("error_if_exact", "max-norm error against the standing wave"),
            ],
            ((s.n, s.t, s.max_norm, s.error) for s in records[-1].history),
            config=meta,
        )
        for r in records:
            order = "-" if r.order is None else f"{r.order:.3f}"
            console.print(f"N_R={r.n_right:4d}  dt={r.dt:.4e}  error={r.error:.4e}  order={order}")


@app.command()
def symbol(
    p: int = typer.Option(2, help="Order of accuracy"),
    alpha2: float = typer.Option(0.25),
    alpha4: float = typer.Option(0.0),
    scheme: AmpScheme = typer.Option(AmpScheme.ime, help="IME, IME-UW or IME-UW-PC"),
    nu: float = typer.Option(0.0, help="Dissipation coefficient nu_p"),
    n_u: int = typer.Option(1, help="Corrections of the predictor-corrector scheme"),
    n_k: int = typer.Option(256, help="Wavenumbers on [0, pi]"),
    n_z: int = typer.Option(64, help="Log-spaced values of z = dt^2 on [1e-4, 1e4]"),
    out: Path = typer.Option(Path("run"), help="Output directory"),
    config: Path | None = typer.Option(None, help="JSON file overriding the flags"),
):
    """|a|(kh, z) surface and the unconditional-stability check."""
    with _exit_codes():
        run = RunConfig(
            command="symbol",
            p=p,
            alpha2=alpha2,
            alpha4=alpha4,
            amp_scheme=str(scheme),
            nu=nu,
            n_u=n_u,
            n_k=n_k,
            n_z=n_z,
            out=out,
        ).override(config)
        cfg = run.symbol_config()
        report = verify_unconditional(cfg, n_k=run.n_k, n_z=run.n_z)
        rows = amplification_surface(cfg, np.linspace(0.0, np.pi, run.n_k), np.logspace(-4, 4, run.n_z))
        write_csv(
            run.out / f"symbol_{cfg.scheme}_p{cfg.p}.csv",
            [
                Column("kh", "phase angle k h"),
                Column("z", "dt^2 with h = c = 1"),
                Column("abs_a_plus", "|a+|"),
                Column("abs_a_minus", "|a-|"),
            ],
            rows,
            config=run.to_dict(),
        )
        console.print(f"region: {str(report.region_holds).lower()}")
        console.print(
            f"max |a| = {report.max_modulus:.15g} at kh={report.kh_at_max:.4g}, z={report.z_at_max:.4g}"
        )
        console.print(f"bounded: {str(report.within_unit_circle).lower()}")


@app.command()
def region(
    p: int = typer.Option(4, help="Order of accuracy"),
    alpha2: str = typer.Option("0.25", help="alpha2 value or list"),
    alpha4: str = typer.Option("0.0833333333333333", help="alpha4 value or list"),
    out: Path = typer.Option(Path("run"), help="Output directory"),
    config: Path | None = typer.Option(None, help="JSON file overriding the flags"),
):
    """Unconditional-stability predicate over (alpha2, alpha4)."""
    with _exit_codes():
        run = RunConfig(
            command="region",
            p=p,
            alpha2_values=parse_float_list(alpha2),
            alpha4_values=parse_float_list(alpha4),
            out=out,
        ).override(config)
        if run.p not in (2, 4):
            raise ConfigError(f"order p must be 2 or 4, got {run.p}")
        if not run.alpha2_values or not run.alpha4_values:
            raise ConfigError("need at least one alpha2 and one alpha4 value")
        pairs = [(a2, a4) for a2 in run.alpha2_values for a4 in run.alpha4_values]
        rows = [(a2, a4, stability_region(run.p, a2, a4)) for a2, a4 in pairs]
        if len(rows) == 1:
            console.print(f"stable: {str(rows[0][2]).lower()}")
        else:
            for a2, a4, ok in rows:
                console.print(f"alpha2={a2:g} alpha4={a4:g} stable: {str(ok).lower()}")
        write_csv(
            run.out / f"region_p{run.p}.csv",
            [
                Column("alpha2", "implicit weight alpha2"),
                Column("alpha4", "implicit weight alpha4"),
                Column("stable", "unconditionally stable on a periodic domain"),
            ],
            rows,
            config=run.to_dict(),
        )


@app.command()
def gks(
    cfl: float = typer.Option(0.9, help="CFL number lambda"),
    alpha2: float = typer.Option(0.0),
    n_theta: int = typer.Option(10_000),
    out: Path = typer.Option(Path("run"), help="Output directory"),
    config: Path | None = typer.Option(None, help="JSON file overriding the flags"),
):
    """Normal-mode check of an explicit/implicit interface."""
    with _exit_codes():
        run = RunConfig(command="gks", cfl=cfl, alpha2=alpha2, n_theta=n_theta, out=out).override(config)
        if run.cfl is None or run.cfl <= 0 or run.n_theta < 1:
            raise ConfigError(f"need cfl > 0 and n_theta >= 1, got {run.cfl}, {run.n_theta}")
        report = gks_check(run.cfl, run.alpha2, run.n_theta)
        summary = {
            "precondition_ok": report.precondition_ok,
            "unit_circle_ok": report.unit_circle_ok,
            "max_unit_deviation": report.max_unit_deviation,
            "interface_ok": report.interface_ok,
            "max_interface_product": report.max_interface_product,
            "max_product_error": report.max_product_error,
        }
        write_csv(
            run.out / f"gks_l{run.cfl:g}_a{run.alpha2:g}.csv",
            [
                Column("theta", "Fourier angle of the interior mode"),
                Column("abs_a_plus", "|a+|"),
                Column("abs_a_minus", "|a-|"),
            ],
            ((t, m[0], m[1]) for t, m in zip(report.theta, report.root_moduli)),
            config=run.to_dict() | {"summary": summary},
        )
        console.print(f"preconditions: {str(report.precondition_ok).lower()}")
        console.print(
            f"unit circle: {str(report.unit_circle_ok).lower()} (max ||a|-1| = {report.max_unit_deviation:.3e})"
        )
        console.print(
            f"interface: {str(report.interface_ok).lower()} (max |kL+ kR+| = {report.max_interface_product:.6f})"
        )


@app.command()
def verify(
    scheme: str = typer.Option("SPIE2"),
    delta: float = typer.Option(1.0),
    gamma: float = typer.Option(0.3),
    steps: int = typer.Option(20, help="Time steps compared"),
    nr: int = typer.Option(10),
    n_u: int | None = typer.Option(None),
    s_f: float | None = typer.Option(None),
    cfl: float | None = typer.Option(None),
    seed: int = typer.Option(DEFAULT_SEED, envvar="WAVESTAB_SEED"),
    config: Path | None = typer.Option(None, help="JSON file overriding the flags"),
):
    """Compare time stepping with the compressed B1/B2 recurrence."""
    with _exit_codes():
        run = RunConfig(
            command="verify",
            scheme=scheme,
            delta=delta,
            gammas=(gamma,),
            n_steps=steps,
            n_right=nr,
            n_u=n_u,
            s_f=s_f,
            cfl=cfl,
            seed=seed,
        ).override(config)
        scheme_cfg = run.scheme_config()
        grid = build_overset(run.delta, run.n_right, scheme_cfg.p)
        deviation = verify_compression(grid, scheme_cfg, run.n_steps, run.seed)
        console.print(f"deviation: {deviation:.3e}")
        if deviation > COMPRESSION_TOL:
            err_console.print(f"deviation exceeds {COMPRESSION_TOL:g}", style="red")
            raise typer.Exit(code=1)


@app.command()
def modes(
    scheme: str = typer.Option("SPIE2"),
    delta: float = typer.Option(1.55),
    gamma: float = typer.Option(0.3),
    nr: int = typer.Option(10),
    n_u: int | None = typer.Option(None),
    s_f: float | None = typer.Option(None),
    cfl: float | None = typer.Option(None),
    out: Path = typer.Option(Path("run"), help="Output directory"),
    config: Path | None = typer.Option(None, help="JSON file overriding the flags"),
):
    """Eigenvalues of the three-level update for one (delta, gamma)."""
    with _exit_codes():
        run = RunConfig(
            command="modes",
            scheme=scheme,
            delta=delta,
            gammas=(gamma,),
            n_right=nr,
            n_u=n_u,
            s_f=s_f,
            cfl=cfl,
            out=out,
        ).override(config)
        scheme_cfg = run.scheme_config()
        grid = build_overset(run.delta, run.n_right, scheme_cfg.p)
        report = analyze(grid, scheme_cfg)
        write_csv(
            run.out / f"modes_{scheme_cfg.tag}_d{run.delta:g}_g{run.gammas[0]:g}.csv",
            [Column("re", "Re a"), Column("im", "Im a"), Column("modulus", "|a|")],
            eigenvalue_rows(report),
            config=run.to_dict() | {"scheme_config": scheme_cfg.to_dict()},
        )
        console.print(f"max |a| = {report.max_modulus:.12f}")
        console.print(f"unstable: {report.unstable_count}")
