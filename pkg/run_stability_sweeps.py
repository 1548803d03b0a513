from __future__ import annotations

import os
import time
from dataclasses import dataclass
from datetime import date
from pathlib import Path

import typer
from rich.console import Console
from rich.table import Table

from wavestab._logging import setup_logging
from wavestab.grid import SweepPlan
from wavestab.matstab import run_sweep
from wavestab.output import Column, write_csv
from wavestab.stepping import SchemeCase, SchemeConfig

console = Console()


@dataclass
class SweepCase:
    case: SchemeCase  # EME, IME or SPIE
    p: int  # Order of accuracy
    n_u: int | None = None  # Dissipation corrections, case default if None


CASES = [
    SweepCase(SchemeCase.EME, 2),
    SweepCase(SchemeCase.EME, 4),
    SweepCase(SchemeCase.IME, 2),
    SweepCase(SchemeCase.IME, 4),
    SweepCase(SchemeCase.SPIE, 2, n_u=1),
    SweepCase(SchemeCase.SPIE, 2, n_u=2),
    SweepCase(SchemeCase.SPIE, 4, n_u=1),
    SweepCase(SchemeCase.SPIE, 4, n_u=2),
]


def main(
    n_delta: int = typer.Option(101, help="Grids per sweep"),
    nr: int = typer.Option(10, help="Active points on the right grid"),
    jobs: int = typer.Option(os.cpu_count() or 1, help="Worker processes"),
    trapezoidal: bool = typer.Option(False, help="Also sweep SPIE with alpha2=1/2, alpha4=5/24"),
    expname: str | None = None,
):
    setup_logging()
    out = Path(f"./run/{expname or date.today().isoformat()}")
    plan = SweepPlan(n_delta=n_delta)

    configs = [SchemeConfig.for_case(c.case, c.p, n_u=c.n_u) for c in CASES]
    if trapezoidal:
        configs += [SchemeConfig.for_case(SchemeCase.SPIE, p).trapezoidal() for p in (2, 4)]

    summary = Table(title="Unstable grids per gamma")
    summary.add_column("case")
    for g in plan.gamma_values:
        summary.add_column(f"{g:.1f}", justify="right")

    for cfg in configs:
        tic = time.monotonic()
        report = run_sweep(plan, cfg, nr, jobs=jobs)
        toc = time.monotonic()
        label = f"{cfg.tag} n_u={cfg.n_u}" + (" trap" if cfg.alpha2 == 0.5 else "")
        console.print(f"{label}: {len(report.results)} cells in {toc - tic:.1f} seconds")

        rows = report.count_rows()
        write_csv(
            out / f"{label.replace(' ', '_').replace('=', '')}.csv",
            [
                Column("gamma", "dissipation scale"),
                Column("n_unstable_grids", "grids with an eigenvalue |a| > 1 + tol_a"),
                Column("n_grids", "grids in the sweep"),
                Column("n_failed", "cells that raised an error"),
            ],
            rows,
            config=cfg.to_dict() | {"n_right": nr, "n_delta": n_delta},
        )
        summary.add_row(label, *(str(n) for _, n, _, _ in rows))

    console.print(summary)


if __name__ == "__main__":
    typer.run(main)
