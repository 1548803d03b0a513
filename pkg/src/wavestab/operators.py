"""Finite-difference operators on uniform grids.

All operators are built from centred per-axis stencils. They are offered in
two forms: matrix-free application on an array carrying a halo, and assembled
dense matrices for the one-dimensional finite-domain work.
"""

from __future__ import annotations

import math
from collections.abc import Sequence
from dataclasses import dataclass
from enum import StrEnum
from functools import cache

import numpy as np
import numpy.typing as npt

from .errors import BoundViolationError, ConfigError, HaloError

__all__ = [
    "KAPPA",
    "laplacian_stencil",
    "squared_laplacian_stencil",
    "dissipation_stencil",
    "StencilOperator",
    "apply_L",
    "apply_L2sq",
    "apply_Q",
    "pad_periodic",
    "stencil_matrix",
    "ImplicitKind",
    "ImplicitOperator",
    "DissipationParams",
    "dissipation_coefficient",
    "recommended_nu",
    "grid_cfl",
]

KAPPA = (1.0, -1.0 / 12.0, 1.0 / 90.0, -1.0 / 560.0)

FloatArray = npt.NDArray[np.float64]
Spacing = float | Sequence[float]

_DPDM = np.array([1.0, -2.0, 1.0])


def _power(stencil: FloatArray, k: int) -> FloatArray:
    out = np.array([1.0])
    for _ in range(k):
        out = np.convolve(out, stencil)
    return out


def _center_pad(stencil: FloatArray, width: int) -> FloatArray:
    extra = (width - stencil.size) // 2
    return np.pad(stencil, extra)


def _check_order(p: int) -> None:
    if p not in (2, 4):
        raise ConfigError(f"order p must be 2 or 4, got {p}")


@cache
def laplacian_stencil(p: int) -> tuple[float, ...]:
    """Coefficients of h^2 L_{p,h} / c^2 along one axis (width p+1)."""
    _check_order(p)
    out = np.zeros(p + 1)
    for m in range(p // 2):
        out += KAPPA[m] * _center_pad(_power(_DPDM, m + 1), p + 1)
    return tuple(float(v) for v in out)


@cache
def squared_laplacian_stencil() -> tuple[float, ...]:
    """Coefficients of h^4 L_{2,h}^2 / c^4 along one axis."""
    return tuple(float(v) for v in _power(_DPDM, 2))


@cache
def dissipation_stencil(p: int) -> tuple[float, ...]:
    """Coefficients of h Q_p / c along one axis, the undivided (-D+D-)^{p/2+1}."""
    _check_order(p)
    return tuple(float(v) for v in _power(-_DPDM, p // 2 + 1))


def _spacings(h: Spacing, n_d: int) -> tuple[float, ...]:
    if isinstance(h, (int, float)):
        return (float(h),) * n_d
    hs = tuple(float(v) for v in h)
    if len(hs) != n_d:
        raise ConfigError(f"expected {n_d} grid spacings, got {len(hs)}")
    return hs


def _trim(field: FloatArray, width: int) -> FloatArray:
    if width == 0:
        return field
    return field[tuple(slice(width, n - width) for n in field.shape)]


@dataclass(frozen=True, kw_only=True)
class StencilOperator:
    coefficients: tuple[float, ...]
    """Centred per-axis coefficients, odd length"""
    scales: tuple[float, ...]
    """One multiplier per axis, e.g. c^2/h_d^2"""

    def __post_init__(self):
        if len(self.coefficients) % 2 != 1:
            raise ConfigError("stencil length must be odd")

    @property
    def n_d(self) -> int:
        return len(self.scales)

    @property
    def radius(self) -> int:
        return len(self.coefficients) // 2

    def apply(self, field: npt.ArrayLike, halo: int | None = None) -> FloatArray:
        """Apply to every point at least ``halo`` cells inside the array."""
        arr = np.asarray(field)
        if arr.ndim != self.n_d:
            raise ConfigError(f"field has {arr.ndim} axes, operator expects {self.n_d}")
        halo = self.radius if halo is None else halo
        if halo < self.radius:
            raise HaloError(f"halo {halo} is smaller than the stencil radius {self.radius}")
        if any(n <= 2 * halo for n in arr.shape):
            raise HaloError(f"field of shape {arr.shape} has no interior for halo {halo}")

        out = None
        for axis, scale in enumerate(self.scales):
            term = self._apply_axis(arr, axis, halo)
            out = scale * term if out is None else out + scale * term
        assert out is not None
        return out

    def _apply_axis(self, arr: FloatArray, axis: int, halo: int) -> FloatArray:
        r = self.radius
        acc = None
        for offset, coef in zip(range(-r, r + 1), self.coefficients):
            if coef == 0.0:
                continue
            index = tuple(
                slice(halo + offset, n - halo + offset) if d == axis else slice(halo, n - halo)
                for d, n in enumerate(arr.shape)
            )
            acc = coef * arr[index] if acc is None else acc + coef * arr[index]
        assert acc is not None
        return acc

    def symbol(self, theta: npt.ArrayLike) -> npt.NDArray[np.complex128]:
        """Fourier symbol for per-axis phase angles ``theta = k_d h_d``."""
        th = np.atleast_1d(np.asarray(theta, dtype=np.float64))
        r = self.radius
        total = np.zeros(th.shape[:-1] if th.ndim > 1 else (), dtype=np.complex128)
        for d, scale in enumerate(self.scales):
            t = th[..., d] if th.ndim > 1 else th[d]
            for offset, coef in zip(range(-r, r + 1), self.coefficients):
                total = total + scale * coef * np.exp(1j * offset * t)
        return total


def laplacian_operator(p: int, h: Spacing, c: float = 1.0, n_d: int = 1) -> StencilOperator:
    return StencilOperator(
        coefficients=laplacian_stencil(p),
        scales=tuple(c**2 / hd**2 for hd in _spacings(h, n_d)),
    )


def squared_laplacian_operator(h: Spacing, c: float = 1.0, n_d: int = 1) -> StencilOperator:
    return StencilOperator(
        coefficients=squared_laplacian_stencil(),
        scales=tuple(c**4 / hd**4 for hd in _spacings(h, n_d)),
    )


def dissipation_operator(p: int, h: Spacing, c: float = 1.0, n_d: int = 1) -> StencilOperator:
    return StencilOperator(
        coefficients=dissipation_stencil(p),
        scales=tuple(c / hd for hd in _spacings(h, n_d)),
    )


def apply_L(
    p: int, field: npt.ArrayLike, h: Spacing, c: float = 1.0, halo: int | None = None
) -> FloatArray:
    """c^2 times the compact order-p Laplacian, on the interior of ``field``."""
    arr = np.asarray(field)
    halo = p // 2 if halo is None else halo
    return laplacian_operator(p, h, c, arr.ndim).apply(arr, halo)


def apply_L2sq(
    field: npt.ArrayLike, h: Spacing, c: float = 1.0, halo: int = 2
) -> FloatArray:
    """L_{2,h} applied twice; needs a halo of two cells."""
    if halo < 2:
        raise HaloError(f"the squared Laplacian needs a halo of 2, got {halo}")
    inner = _trim(np.asarray(field), halo - 2)
    return apply_L(2, apply_L(2, inner, h, c, halo=1), h, c, halo=1)


def apply_Q(
    p: int, field: npt.ArrayLike, h: Spacing, c: float = 1.0, halo: int | None = None
) -> FloatArray:
    arr = np.asarray(field)
    halo = p // 2 + 1 if halo is None else halo
    return dissipation_operator(p, h, c, arr.ndim).apply(arr, halo)


def pad_periodic(field: npt.ArrayLike, width: int) -> FloatArray:
    return np.pad(np.asarray(field), width, mode="wrap")


def stencil_matrix(
    n: int,
    coefficients: Sequence[float],
    *,
    scale: float = 1.0,
    periodic: bool = False,
    rows: Sequence[int] | None = None,
) -> FloatArray:
    """Dense matrix of a centred stencil on ``n`` points.

    Only the listed ``rows`` are assembled (all rows by default); on a
    non-periodic grid every requested row must see its full stencil.
    """
    r = len(coefficients) // 2
    rows = range(n) if rows is None else rows
    mat = np.zeros((len(rows), n))
    for i, row in enumerate(rows):
        if not periodic and (row - r < 0 or row + r >= n):
            raise HaloError(f"row {row} of {n} lacks a halo of {r}")
        for offset, coef in zip(range(-r, r + 1), coefficients):
            col = (row + offset) % n if periodic else row + offset
            mat[i, col] += scale * coef
    return mat


class ImplicitKind(StrEnum):
    A2 = "A2"
    A4 = "A4"


@dataclass(frozen=True, kw_only=True)
class ImplicitOperator:
    """A_2 = I - a2 dt^2 L_2 or A_4 = I - a2 dt^2 L_4 + a4 dt^4 L_2^2 on a 1D grid."""

    p: int
    alpha2: float
    alpha4: float = 0.0
    dt: float
    c: float = 1.0
    h: float

    def __post_init__(self):
        _check_order(self.p)

    @property
    def kind(self) -> ImplicitKind:
        return ImplicitKind.A2 if self.p == 2 else ImplicitKind.A4

    def stencil(self) -> tuple[float, ...]:
        lam2 = (self.c * self.dt / self.h) ** 2
        out = np.zeros(5 if self.p == 4 else 3)
        out[out.size // 2] = 1.0
        out -= self.alpha2 * lam2 * _center_pad(np.array(laplacian_stencil(self.p)), out.size)
        if self.p == 4:
            out += self.alpha4 * lam2**2 * np.array(squared_laplacian_stencil())
        return tuple(float(v) for v in out)

    def apply(self, field: npt.ArrayLike, halo: int | None = None) -> FloatArray:
        op = StencilOperator(coefficients=self.stencil(), scales=(1.0,))
        return op.apply(field, halo)

    def matrix(self, n: int, *, periodic: bool = True, rows: Sequence[int] | None = None) -> FloatArray:
        return stencil_matrix(n, self.stencil(), periodic=periodic, rows=rows)


@dataclass(frozen=True, kw_only=True)
class DissipationParams:
    nu_p: float
    gamma: float = 1.0
    n_u: int = 1
    s_f: float
    bound: float
    """Strict upper limit on nu_p for the predictor-corrector scheme"""

    @property
    def sigma_nu(self) -> int:
        return 2 if self.n_u % 2 == 0 else 1

    @property
    def nu_gamma(self) -> float:
        return self.gamma * self.nu_p


def dissipation_coefficient(
    p: int,
    n_u: int,
    s_f: float,
    cfl_per_axis: Sequence[float],
    gamma: float = 1.0,
) -> DissipationParams:
    """nu_p = s_f / (2^{p+1} sum_d lambda_d), with admissibility s_f < sigma_{n_u}."""
    _check_order(p)
    if n_u < 1:
        raise ConfigError(f"n_u must be at least 1, got {n_u}")
    if not 0.0 <= gamma <= 1.0:
        raise ConfigError(f"gamma must lie in [0, 1], got {gamma}")
    lambdas = [float(v) for v in cfl_per_axis]
    if not lambdas or any(v <= 0 for v in lambdas):
        raise ConfigError(f"CFL numbers must be positive, got {lambdas}")
    sigma = 2 if n_u % 2 == 0 else 1
    if s_f < 0:
        raise ConfigError(f"safety factor must be non-negative, got {s_f}")
    if s_f >= sigma:
        raise BoundViolationError(
            f"safety factor {s_f} is not below sigma={sigma} for n_u={n_u}"
        )
    denom = 2 ** (p + 1) * sum(lambdas)
    return DissipationParams(
        nu_p=s_f / denom, gamma=gamma, n_u=n_u, s_f=s_f, bound=sigma / denom
    )


def grid_cfl(dt: float, h: Spacing, c: float = 1.0) -> float:
    """lambda_g = c dt sqrt(sum_d 1/h_d^2)."""
    hs = (float(h),) if isinstance(h, (int, float)) else tuple(h)
    return c * dt * math.sqrt(sum(1.0 / hd**2 for hd in hs))


def recommended_nu(p: int, n_d: int, s_f: float, lambda_g: float, implicit: bool) -> float:
    """Per-grid nu_p; explicit grids run near lambda_g = 1 so the CFL factor is dropped."""
    _check_order(p)
    base = s_f / (2 ** (p + 1) * math.sqrt(n_d))
    return base / lambda_g if implicit else base
