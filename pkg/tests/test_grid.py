import json
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from wavestab.errors import (
    ConfigError,
    DegenerateStencilError,
    ExplicitInterpolationError,
    InfeasibleOverlapError,
)
from wavestab.grid import (
    Side,
    SweepPlan,
    _all_stencils,
    build_overset,
    enumerate_grids,
    ghost_count,
    lagrange_weights,
)


def test_equal_spacing_grid():
    grid = build_overset(1.0, 10, 2)
    assert grid.left.h == pytest.approx(0.05)
    assert grid.right.h == pytest.approx(0.05)
    assert grid.left.n_active == 31
    assert grid.b_left == pytest.approx(0.55)
    assert grid.b_left == -1.0 + grid.delta * grid.right.h * grid.left.n_active
    assert all(len(s.weights) == 3 for s in grid.stencils)
    assert len(grid.stencils) == 2 * ghost_count(2)


def test_target_on_a_donor_node_gets_a_unit_stencil():
    grid = build_overset(1.0, 10, 2)
    stencil = next(s for s in grid.stencils_for(Side.right) if s.target_index == -2)
    assert stencil.weights == (0.0, 1.0, 0.0)


def test_fine_left_grid():
    grid = build_overset(0.25, 10, 2)
    assert grid.left.h == pytest.approx(0.0125)
    assert grid.left.n_active == 121
    assert grid.b_left == pytest.approx(0.5125)


def test_point_classification():
    grid = build_overset(0.7, 12, 4)
    left, right = grid.left, grid.right
    assert left.n_ghost == right.n_ghost == 3
    assert list(left.active_indices) == list(range(1, left.n_active + 1))
    assert list(right.active_indices) == list(range(0, 12))
    assert left.boundary_index == 0
    assert right.boundary_index == 12
    assert list(left.interp_indices) == [left.n_active + k for k in (1, 2, 3)]
    assert list(right.interp_indices) == [-3, -2, -1]
    assert right.mirror(13) == 11
    assert left.mirror(-2) == 2
    assert right.x(right.boundary_index) == pytest.approx(1.0)
    assert left.x(0) == -1.0


@pytest.mark.parametrize("delta, p", [(1.3, 2), (0.6, 4), (1.0, 2)])
def test_overlap_is_minimal(delta, p):
    grid = build_overset(delta, 10, p)
    shorter = replace(grid.left, n_active=grid.left.n_active - 1)
    assert _all_stencils(shorter, grid.right, p) is None


@pytest.mark.parametrize("delta, n_left, b_left", [(1.55, 20, 0.55), (0.5, 61, 0.525), (2.0, 16, 0.6)])
def test_left_domain_reaches_past_the_right_boundary(delta, n_left, b_left):
    grid = build_overset(delta, 10, 2)
    assert grid.left.n_active == n_left
    assert grid.b_left == pytest.approx(b_left)


def test_domains_overlap_on_every_sweep_grid():
    for p in (2, 4):
        for grid in enumerate_grids(SweepPlan(), 10, p):
            assert grid.b_left > 0.5
            for s in grid.stencils:
                donor = grid.component(s.donor_side)
                assert set(s.donor_indices) <= set(donor.active_indices)


@pytest.mark.parametrize(
    "x, expected",
    [(1.0, (0.0, 1.0, 0.0)), (0.5, (3 / 8, 3 / 4, -1 / 8)), (1.5, (-1 / 8, 3 / 4, 3 / 8))],
)
def test_lagrange_weights(x, expected):
    h = 0.2
    weights = lagrange_weights([0.0, h, 2 * h], x * h)
    np.testing.assert_allclose(weights, expected, atol=1e-14)


def test_lagrange_degenerate():
    with pytest.raises(DegenerateStencilError):
        lagrange_weights([0.0, 0.1, 0.1], 0.05)


@given(
    delta=st.floats(min_value=0.25, max_value=2.0),
    p=st.sampled_from([2, 4]),
    n_right=st.integers(min_value=10, max_value=20),
)
def test_interpolation_is_exact_for_polynomials(delta, p, n_right):
    grid = build_overset(delta, n_right, p)
    grid.check_explicit()
    for s in grid.stencils:
        assert abs(sum(s.weights) - 1.0) < 1e-13
        target = grid.component(s.target_side)
        donor = grid.component(s.donor_side)
        x = target.x(s.target_index)
        xs = np.array([donor.x(m) for m in s.donor_indices])
        assert s.donor_start >= donor.donor_range[0]
        assert s.donor_start + p <= donor.donor_range[1]
        assert not set(s.donor_indices) & set(donor.interp_indices)
        for q in range(p + 1):
            exact = x**q
            approx = float(np.dot(s.weights, xs**q))
            assert abs(approx - exact) <= 1e-12 * max(1.0, abs(exact))


def test_explicit_check_detects_implicit_coupling():
    grid = build_overset(1.0, 10, 2)
    s = grid.stencils[0]
    donor = grid.component(s.donor_side)
    bad = type(s)(
        target_side=s.target_side,
        target_index=s.target_index,
        donor_side=s.donor_side,
        donor_start=min(donor.interp_indices) - 1,
        weights=s.weights,
    )
    broken = type(grid)(
        left=grid.left,
        right=grid.right,
        delta=grid.delta,
        b_left=grid.b_left,
        p=grid.p,
        stencils=(bad,) + grid.stencils[1:],
    )
    with pytest.raises(ExplicitInterpolationError):
        broken.check_explicit()


def test_build_errors():
    with pytest.raises(ConfigError):
        build_overset(0.0, 10, 2)
    with pytest.raises(ConfigError):
        build_overset(1.0, 3, 2)
    with pytest.raises(ConfigError):
        build_overset(1.0, 10, 3)
    with pytest.raises(InfeasibleOverlapError):
        build_overset(10.0, 10, 2)


def test_enumerate_grids():
    assert len(enumerate_grids(SweepPlan(), 10, 2)) == 101
    (only,) = enumerate_grids(SweepPlan(delta_min=1.0, delta_max=1.0, n_delta=1), 10, 2)
    assert only.delta == 1.0
    grids = enumerate_grids(SweepPlan(delta_min=0.5, delta_max=2.0, n_delta=4), 10, 2)
    assert [g.delta for g in grids] == pytest.approx([0.5, 1.0, 1.5, 2.0])


def test_sweep_plan_validation():
    with pytest.raises(ConfigError):
        SweepPlan(n_delta=0)
    with pytest.raises(ConfigError):
        SweepPlan(delta_min=2.0, delta_max=1.0)
    with pytest.raises(ConfigError):
        SweepPlan(gamma_values=(0.5, 1.5))
    assert SweepPlan().gamma_values == pytest.approx([0.1 * i for i in range(11)])


def test_json_round_trip_fields():
    grid = build_overset(0.8, 10, 4)
    data = json.loads(grid.to_json())
    assert data["left"]["side"] == "left"
    assert data["right"]["n_active"] == 10
    assert len(data["stencils"]) == 6
    assert len(data["stencils"][0]["weights"]) == 5
