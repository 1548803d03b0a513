import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from wavestab.errors import BoundViolationError, ConfigError, HaloError
from wavestab.operators import (
    ImplicitOperator,
    apply_L,
    apply_L2sq,
    apply_Q,
    dissipation_coefficient,
    dissipation_operator,
    dissipation_stencil,
    grid_cfl,
    laplacian_operator,
    laplacian_stencil,
    pad_periodic,
    recommended_nu,
    stencil_matrix,
)


@pytest.mark.parametrize("p", [2, 4])
def test_constants_are_annihilated(p):
    u = np.full((12,), 3.5)
    np.testing.assert_allclose(apply_L(p, u, 0.1), 0.0, atol=1e-9)
    np.testing.assert_allclose(apply_Q(p, u, 0.1), 0.0, atol=1e-12)
    np.testing.assert_allclose(apply_L2sq(u, 0.1), 0.0, atol=1e-8)


def test_stencil_shapes():
    assert laplacian_stencil(2) == (1.0, -2.0, 1.0)
    np.testing.assert_allclose(laplacian_stencil(4), [-1 / 12, 4 / 3, -5 / 2, 4 / 3, -1 / 12])
    assert dissipation_stencil(2) == (1.0, -4.0, 6.0, -4.0, 1.0)
    assert len(dissipation_stencil(4)) == 7
    assert sum(dissipation_stencil(4)) == 0.0


def test_highest_mode_on_unit_grid():
    j = np.arange(-2, 20)
    u = np.cos(np.pi * j)
    np.testing.assert_allclose(apply_L(2, u, 1.0, halo=2), -4.0 * u[2:-2], atol=1e-12)
    np.testing.assert_allclose(apply_L(4, u, 1.0, halo=2), -16.0 / 3.0 * u[2:-2], atol=1e-12)


def test_fourth_order_complex_mode():
    j = np.arange(-2, 14)
    u = np.exp(1j * np.pi * j)
    np.testing.assert_allclose(apply_L(4, u, 1.0), -16.0 / 3.0 * u[2:-2], atol=1e-12)


def test_squared_laplacian_is_a_composition():
    rng = np.random.default_rng(7)
    u = pad_periodic(rng.standard_normal(16), 2)
    inner = apply_L(2, u, 0.3, halo=1)
    assert np.array_equal(apply_L2sq(u, 0.3), apply_L(2, inner, 0.3, halo=1))


def test_squared_laplacian_kills_cubics():
    x = np.arange(10.0)
    u = x**3 - 2 * x**2 + x
    assert np.all(apply_L2sq(u, 1.0) == 0.0)


def test_dissipation_of_a_kronecker_delta():
    u = np.zeros(11)
    u[5] = 1.0
    out = apply_Q(2, u, 1.0)
    np.testing.assert_array_equal(out, [0.0, 1.0, -4.0, 6.0, -4.0, 1.0, 0.0])


def test_dissipation_kills_linear_data():
    u = 2.0 * np.arange(12.0) - 5.0
    assert np.all(apply_Q(2, u, 1.0) == 0.0)
    assert np.all(apply_Q(4, u, 1.0) == 0.0)


def test_two_dimensional_laplacian_adds_axes():
    x = np.arange(-1, 9)
    u = np.cos(np.pi * x)[:, None] * np.cos(np.pi * x)[None, :]
    np.testing.assert_allclose(apply_L(2, u, (1.0, 1.0)), -8.0 * u[1:-1, 1:-1], atol=1e-12)


def test_halo_errors():
    u = np.zeros(12)
    with pytest.raises(HaloError):
        apply_L(4, u, 1.0, halo=1)
    with pytest.raises(HaloError):
        apply_L2sq(u, 1.0, halo=1)
    with pytest.raises(HaloError):
        apply_L(2, np.zeros(2), 1.0)
    with pytest.raises(HaloError):
        stencil_matrix(5, laplacian_stencil(2), rows=[0])
    with pytest.raises(ConfigError):
        apply_L(3, u, 1.0)


@pytest.mark.parametrize("p", [2, 4])
def test_order_of_accuracy(p):
    errors = []
    for n in (20, 40, 80):
        h = 1.0 / n
        x = np.arange(-p, n + p + 1) * h
        approx = apply_L(p, np.sin(x), h, halo=p)
        errors.append(np.max(np.abs(approx + np.sin(x[p:-p]))))
    orders = np.log2(np.array(errors[:-1]) / np.array(errors[1:]))
    assert np.all(orders > p - 0.2)


@pytest.mark.parametrize("p", [2, 4])
def test_dissipation_symbol_is_non_negative(p):
    theta = np.linspace(-np.pi, np.pi, 201)
    q = np.array([dissipation_operator(p, 1.0).symbol([t]) for t in theta])
    assert np.all(q.real >= -1e-12)
    np.testing.assert_allclose(q.imag, 0.0, atol=1e-12)
    np.testing.assert_allclose(q.real, (4 * np.sin(theta / 2) ** 2) ** (p // 2 + 1), atol=1e-10)


def test_laplacian_symbol():
    lap = laplacian_operator(2, 0.5)
    np.testing.assert_allclose(lap.symbol([np.pi]).real, -16.0)


@pytest.mark.parametrize("p", [2, 4])
def test_implicit_operator_preserves_constants(p):
    op = ImplicitOperator(p=p, alpha2=0.25, alpha4=1 / 12, dt=0.4, h=0.1)
    np.testing.assert_allclose(op.apply(np.ones(12)), 1.0, atol=1e-12)
    assert sum(op.stencil()) == pytest.approx(1.0)
    mat = op.matrix(10)
    np.testing.assert_allclose(mat.sum(axis=1), 1.0, atol=1e-12)


def test_implicit_second_order_stencil():
    op = ImplicitOperator(p=2, alpha2=0.25, dt=0.2, h=0.1)
    # lambda^2 = 4
    np.testing.assert_allclose(op.stencil(), [-1.0, 3.0, -1.0])


def test_dissipation_coefficient_examples():
    params = dissipation_coefficient(2, 1, 0.9, [0.9])
    assert params.nu_p == pytest.approx(0.125)
    assert params.bound == pytest.approx(1 / 7.2)
    assert params.sigma_nu == 1

    params = dissipation_coefficient(2, 2, 1.9, [0.9], gamma=0.5)
    assert params.nu_p == pytest.approx(1.9 / 7.2)
    assert params.bound == pytest.approx(2 / 7.2)
    assert params.nu_gamma == pytest.approx(0.95 / 7.2)

    assert dissipation_coefficient(4, 1, 0.0, [2.0]).nu_p == 0.0


def test_dissipation_coefficient_bounds():
    with pytest.raises(BoundViolationError):
        dissipation_coefficient(2, 1, 1.0, [0.9])
    with pytest.raises(BoundViolationError):
        dissipation_coefficient(2, 2, 2.0, [0.9])
    with pytest.raises(ConfigError):
        dissipation_coefficient(2, 0, 0.5, [0.9])
    with pytest.raises(ConfigError):
        dissipation_coefficient(2, 1, 0.5, [0.0])
    with pytest.raises(ConfigError):
        dissipation_coefficient(2, 1, 0.5, [1.0], gamma=1.5)


@given(
    p=st.sampled_from([2, 4]),
    n_u=st.integers(min_value=1, max_value=4),
    fraction=st.floats(min_value=0.0, max_value=0.999),
    lam=st.lists(st.floats(min_value=0.05, max_value=20.0), min_size=1, max_size=3),
    gamma=st.floats(min_value=0.0, max_value=1.0),
)
def test_dissipation_stays_below_bound(p, n_u, fraction, lam, gamma):
    sigma = 2 if n_u % 2 == 0 else 1
    params = dissipation_coefficient(p, n_u, fraction * sigma, lam, gamma)
    assert 0.0 <= params.nu_gamma <= params.nu_p < params.bound


def test_grid_cfl_and_recommended_nu():
    assert grid_cfl(0.1, 0.1) == pytest.approx(1.0)
    assert grid_cfl(0.1, (0.1, 0.1)) == pytest.approx(np.sqrt(2.0))
    assert recommended_nu(2, 1, 0.9, 0.9, implicit=True) == pytest.approx(0.125)
    assert recommended_nu(2, 1, 0.9, 0.9, implicit=False) == pytest.approx(0.1125)
