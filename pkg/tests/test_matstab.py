import numpy as np
import pytest

from wavestab.errors import ConfigError
from wavestab.grid import Side, SweepPlan, build_overset
from wavestab.matstab import (
    COMPRESSION_TOL,
    SweepResult,
    analyze,
    assemble_periodic_stages,
    assemble_stages,
    compress,
    eigenvalue_rows,
    run_sweep,
    spectrum,
    verify_compression,
)
from wavestab.operators import ImplicitOperator
from wavestab.stepping import DissipationMode, PeriodicGrid1D, SchemeConfig, TimeMode


def spie2(gamma):
    return SchemeConfig.for_case("SPIE", 2, gamma=gamma, n_u=1, s_f=0.9)


class TestAssembly:
    def test_explicit_rows_are_identity(self):
        grid = build_overset(1.0, 10, 2)
        stages = assemble_stages(grid, SchemeConfig.for_case("EME", 2))
        act = list(stages.layout.active)
        np.testing.assert_array_equal(stages.Q0[np.ix_(act, act)], np.eye(len(act)))
        others = [i for i in range(stages.layout.size) if i not in set(act)]
        assert np.all(stages.Q0[np.ix_(act, others)] == 0.0)

    def test_no_dissipation_gives_identity_corrector(self):
        grid = build_overset(0.8, 10, 4)
        stages = assemble_stages(grid, SchemeConfig.for_case("SPIE", 4, gamma=0.0))
        act = list(stages.layout.active)
        np.testing.assert_array_equal(stages.P1[act], stages.P0[act])
        assert np.all(stages.P2[act] == 0.0)

    def test_implicit_rows_match_the_operator(self):
        grid = build_overset(1.0, 10, 2)
        stages = assemble_stages(grid, SchemeConfig.for_case("IME", 2))
        op = ImplicitOperator(p=2, alpha2=0.25, dt=stages.dt, h=grid.right.h)
        off = stages.layout.offsets[Side.right]
        for j in grid.right.active_indices:
            row = off + grid.right.position(j)
            np.testing.assert_allclose(stages.Q0[row, row - 1 : row + 2], op.stencil(), rtol=1e-14)
            assert np.count_nonzero(stages.Q0[row]) == 3

    def test_monolithic_is_rejected(self):
        grid = build_overset(1.0, 10, 2)
        with pytest.raises(ConfigError):
            assemble_stages(grid, SchemeConfig(dissipation=DissipationMode.monolithic))

    def test_periodic_leapfrog(self):
        grid = PeriodicGrid1D(n=12)
        cfg = SchemeConfig.for_case("EME", 2, gamma=0.0)
        stages = assemble_periodic_stages(grid, cfg, mode=TimeMode.explicit)
        update = compress(stages, cfg.corrections)
        lam2 = (stages.dt / grid.h) ** 2
        lap = np.diag(np.full(12, -2.0)) + np.diag(np.ones(11), 1) + np.diag(np.ones(11), -1)
        lap[0, -1] = lap[-1, 0] = 1.0
        np.testing.assert_allclose(update.B1, 2 * np.eye(12) + lam2 * lap, atol=1e-13)
        np.testing.assert_allclose(update.B2, -np.eye(12), atol=1e-13)

    def test_without_corrections(self):
        grid = build_overset(1.0, 10, 2)
        cfg = SchemeConfig.for_case("SPIE", 2, n_u=0)
        stages = assemble_stages(grid, cfg)
        update = compress(stages, 0)
        np.testing.assert_allclose(update.T1, np.linalg.solve(stages.Q0, stages.Q1), atol=1e-12)


class TestSpectrum:
    def test_leapfrog_on_the_unit_circle(self):
        phi = 0.7
        report = spectrum((2 * np.cos(phi) * np.eye(5), -np.eye(5)))
        np.testing.assert_allclose(np.abs(report.eigenvalues), 1.0, atol=1e-12)
        assert report.unstable_count == 0
        assert report.max_residual < 1e-10

    def test_growing_mode(self):
        report = spectrum((3 * np.eye(4), -2 * np.eye(4)))
        assert report.max_modulus == pytest.approx(2.0)
        assert report.unstable_count == 4
        rows = eigenvalue_rows(report)
        assert rows[0][2] == pytest.approx(2.0)
        assert [r[2] for r in rows] == sorted((r[2] for r in rows), reverse=True)

    def test_shape_mismatch(self):
        with pytest.raises(ConfigError):
            spectrum((np.eye(3), np.eye(4)))

    def test_two_unstable_modes(self):
        report = analyze(build_overset(1.55, 10, 2), spie2(0.3))
        assert report.unstable_count == 2

    def test_stable_grid(self):
        report = analyze(build_overset(0.5, 10, 2), spie2(0.3))
        assert report.unstable_count == 0
        assert report.max_modulus <= 1.0 + 1e-8


class TestCompression:
    def test_zero_data(self):
        grid = build_overset(1.0, 10, 2)
        assert verify_compression(grid, spie2(0.3), zero=True) == 0.0

    @pytest.mark.parametrize(
        "case, p, delta, gamma",
        [
            ("EME", 2, 1.0, 0.3),
            ("EME", 4, 0.6, 0.7),
            ("IME", 2, 1.2, 0.5),
            ("IME", 4, 0.45, 0.1),
            ("SPIE", 2, 1.55, 0.3),
            ("SPIE", 4, 0.9, 1.0),
        ],
    )
    def test_recurrence_matches_stepping(self, case, p, delta, gamma):
        grid = build_overset(delta, 10, p)
        cfg = SchemeConfig.for_case(case, p, gamma=gamma)
        assert verify_compression(grid, cfg) <= COMPRESSION_TOL

    def test_matches_stepping_on_random_cells(self, rng):
        for _ in range(4):
            case = str(rng.choice(["EME", "IME", "SPIE"]))
            p = int(rng.choice([2, 4]))
            delta = float(rng.uniform(0.25, 2.0))
            gamma = float(rng.choice(np.linspace(0.0, 1.0, 11)))
            cfg = SchemeConfig.for_case(case, p, gamma=gamma)
            try:
                grid = build_overset(delta, 10, p)
            except ValueError:
                continue
            assert verify_compression(grid, cfg, seed=int(rng.integers(1 << 30))) <= COMPRESSION_TOL


def test_sweep_result_stability():
    base = dict(scheme="SPIE2", p=2, delta=1.0, gamma=0.3, n_u=1, s_f=0.9, n_left=31, max_modulus=1.0)
    assert SweepResult(**base, unstable_count=0).stable
    assert not SweepResult(**base, unstable_count=2).stable
    assert not SweepResult(**base, unstable_count=0, error="singular").stable


def test_small_sweep():
    plan = SweepPlan(delta_min=0.5, delta_max=1.5, n_delta=3, gamma_values=(0.0, 1.0))
    report = run_sweep(plan, SchemeConfig.for_case("EME", 2), progress=False, verify_cells=3)
    assert len(report.results) == 6
    assert [r[0] for r in report.count_rows()] == [0.0, 1.0]
    assert all(r[2] == 3 for r in report.count_rows())
    assert len(report.deviations) == 3
    assert all(dev <= COMPRESSION_TOL for _, _, dev in report.deviations)

    parallel = run_sweep(plan, SchemeConfig.for_case("EME", 2), jobs=2, progress=False, verify_cells=0)
    assert [(r.delta, r.gamma, r.unstable_count) for r in parallel.results] == [
        (r.delta, r.gamma, r.unstable_count) for r in report.results
    ]


FULL = SweepPlan()


def unstable(case, p, **overrides):
    report = run_sweep(FULL, SchemeConfig.for_case(case, p, **overrides), jobs=None, progress=False)
    assert not any(report.failed_cells().values())
    return report.unstable_grids()


@pytest.mark.slow
def test_explicit_sweeps():
    counts = unstable("EME", 2)
    assert 0.5 <= counts[0.0] / FULL.n_delta <= 0.7
    assert all(counts[g] == 0 for g in FULL.gamma_values if g >= 0.3)
    counts = unstable("EME", 4)
    assert all(counts[g] == 0 for g in FULL.gamma_values if g >= 0.5)


@pytest.mark.slow
@pytest.mark.parametrize("p", [2, 4])
def test_implicit_sweeps(p):
    counts = unstable("IME", p)
    assert all(counts[g] == 0 for g in FULL.gamma_values if g >= 0.1)


@pytest.mark.slow
@pytest.mark.parametrize(
    "p, n_u, s_f, gamma_min",
    [(2, 1, 0.9, 0.8), (2, 2, 1.9, 0.3), (4, 2, None, 0.6)],
)
def test_partitioned_sweeps(p, n_u, s_f, gamma_min):
    counts = unstable("SPIE", p, n_u=n_u, s_f=s_f)
    assert all(counts[g] == 0 for g in FULL.gamma_values if g >= gamma_min)


@pytest.mark.slow
def test_single_correction_fourth_order_is_not_enough():
    counts = unstable("SPIE", 4, n_u=1)
    assert counts[1.0] >= 1
