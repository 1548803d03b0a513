"""Von Neumann analysis of the modified-equation schemes.

A Fourier mode ``U^n_j = a^n exp(i k x_j)`` of any of the schemes satisfies a
quadratic ``a^2 - 2 b a + c = 0``. Everything here works on numpy arrays, so
whole (k, z) grids are evaluated at once.
"""

from __future__ import annotations

import logging
from collections.abc import Sequence
from dataclasses import dataclass
from enum import StrEnum

import numpy as np
import numpy.typing as npt

from .errors import ConfigError

__all__ = [
    "AmpScheme",
    "SymbolConfig",
    "SymbolPoint",
    "AmpQuad",
    "fourier_symbols",
    "amplification",
    "schur_stable",
    "stability_region",
    "UnconditionalReport",
    "verify_unconditional",
    "max_amplification",
    "GksReport",
    "gks_check",
    "amplification_surface",
]

logger = logging.getLogger(__name__)

ArrayLike = npt.ArrayLike
FloatArray = npt.NDArray[np.float64]
ComplexArray = npt.NDArray[np.complex128]

REGION_TOL = 1e-14


class AmpScheme(StrEnum):
    ime = "IME"
    monolithic = "IME-UW"
    predictor_corrector = "IME-UW-PC"


@dataclass(frozen=True, kw_only=True)
class SymbolConfig:
    p: int = 2
    alpha2: float = 0.25
    """Set alpha2 = alpha4 = 0 for the explicit schemes"""
    alpha4: float = 0.0
    scheme: AmpScheme = AmpScheme.ime
    nu_p: float = 0.0
    n_u: int = 1

    def __post_init__(self):
        if self.p not in (2, 4):
            raise ConfigError(f"order p must be 2 or 4, got {self.p}")
        if self.nu_p < 0 or self.n_u < 0:
            raise ConfigError(f"need nu_p >= 0 and n_u >= 0, got {self.nu_p}, {self.n_u}")

    @property
    def beta2(self) -> float:
        return 1.0 - 2.0 * self.alpha2

    @property
    def beta4(self) -> float:
        """Explicit fourth-order weight for p=4; no squared-Laplacian term for p=2."""
        if self.p == 2:
            return 0.0
        return self.alpha2 - 2.0 * self.alpha4 - 1.0 / 12.0

    @property
    def a4(self) -> float:
        return self.alpha4 if self.p == 4 else 0.0


@dataclass(frozen=True, kw_only=True)
class SymbolPoint:
    dt: float | FloatArray
    lambda2_sq: FloatArray
    """-symbol of L_{2,h}, c^2 sum_d 4 sin^2(k_d h_d/2) / h_d^2"""
    lambda4_sq: FloatArray
    """-symbol of L_{4,h}"""
    q_p: FloatArray
    """Symbol of Q_p"""
    Lambda_hat: FloatArray
    z: float | FloatArray
    """dt^2"""
    p: int

    @property
    def lambda_p_sq(self) -> FloatArray:
        return self.lambda2_sq if self.p == 2 else self.lambda4_sq


@dataclass(frozen=True, kw_only=True)
class AmpQuad:
    b: FloatArray
    c_coef: FloatArray
    """Product of the roots"""
    a_plus: ComplexArray
    a_minus: ComplexArray
    scheme: AmpScheme
    r_hat: FloatArray | None = None
    """Corrector factor 1 - (nu_p dt/2) q_p for the predictor-corrector scheme"""

    @property
    def max_modulus(self) -> FloatArray:
        return np.maximum(np.abs(self.a_plus), np.abs(self.a_minus))


def fourier_symbols(
    k: ArrayLike | Sequence[ArrayLike],
    h: float | Sequence[float],
    c: float,
    dt: float | ArrayLike,
    config: SymbolConfig,
) -> SymbolPoint:
    """Closed-form symbols; ``k`` and ``h`` carry one entry per axis."""
    ks = [np.asarray(k, dtype=np.float64)] if np.ndim(h) == 0 else [np.asarray(v, dtype=np.float64) for v in k]  # type: ignore[union-attr]
    hs = [float(h)] if np.ndim(h) == 0 else [float(v) for v in h]  # type: ignore[union-attr]
    if len(ks) != len(hs):
        raise ConfigError(f"got {len(ks)} wavenumbers for {len(hs)} spacings")

    lam2 = np.zeros(np.broadcast_shapes(*(kd.shape for kd in ks)))
    lam4 = np.zeros_like(lam2)
    q = np.zeros_like(lam2)
    for kd, hd in zip(ks, hs):
        four_sin2 = 4.0 * np.sin(kd * hd / 2.0) ** 2
        s = four_sin2 / hd**2
        lam2 = lam2 + c**2 * s
        lam4 = lam4 + c**2 * s * (1.0 + hd**2 * s / 12.0)
        q = q + (c / hd) * four_sin2 ** (config.p // 2 + 1)

    dt_arr = np.asarray(dt, dtype=np.float64)
    z = dt_arr**2
    lam_p = lam2 if config.p == 2 else lam4
    Lambda_hat = config.alpha2 * lam_p * z + config.a4 * lam2**2 * z**2
    return SymbolPoint(
        dt=dt_arr,
        lambda2_sq=lam2,
        lambda4_sq=lam4,
        q_p=q,
        Lambda_hat=Lambda_hat,
        z=z,
        p=config.p,
    )


def _roots(b: FloatArray, c: FloatArray) -> tuple[ComplexArray, ComplexArray]:
    disc = np.sqrt(np.asarray(b * b - c, dtype=np.complex128))
    return b + disc, b - disc


def amplification(sp: SymbolPoint, config: SymbolConfig) -> AmpQuad:
    z = sp.z
    numerator = 1.0 - 0.5 * config.beta2 * sp.lambda_p_sq * z - 0.5 * config.beta4 * sp.lambda2_sq**2 * z**2
    denominator = 1.0 + sp.Lambda_hat
    r_hat = None

    match config.scheme:
        case AmpScheme.ime:
            b = numerator / denominator
            c = np.ones_like(b)
        case AmpScheme.monolithic:
            eps = 0.5 * config.nu_p * sp.dt * sp.q_p
            b = numerator / (denominator + eps)
            c = (denominator - eps) / (denominator + eps)
        case AmpScheme.predictor_corrector:
            r_hat = 1.0 - 0.5 * config.nu_p * sp.dt * sp.q_p
            r_n = r_hat**config.n_u
            b = r_n * numerator / denominator
            c = 2.0 * r_n - 1.0

    b = np.asarray(b, dtype=np.float64)
    c = np.broadcast_to(np.asarray(c, dtype=np.float64), b.shape)
    a_plus, a_minus = _roots(b, c)
    return AmpQuad(
        b=b, c_coef=c, a_plus=a_plus, a_minus=a_minus, scheme=config.scheme, r_hat=r_hat
    )


def schur_stable(b: ArrayLike, c: ArrayLike) -> npt.NDArray[np.bool_]:
    """Both roots of a^2 - 2ba + c strictly inside the unit circle, for real b, c."""
    b, c = np.asarray(b), np.asarray(c)
    return (np.abs(c) < 1.0) & (np.abs(b) <= 0.5 * np.abs(1.0 + c))


def stability_region(p: int, alpha2: float, alpha4: float = 0.0, tol: float = REGION_TOL) -> bool:
    """Unconditional stability of the implicit scheme on a periodic domain."""
    if p == 2:
        return alpha2 >= 0.25 - tol
    if p == 4:
        if alpha2 < 1.0 / 12.0 - tol:
            return False
        bound = alpha2 / 4.0 - 1.0 / 48.0
        if alpha2 < 0.25:
            bound += (8.0 / 9.0) * (0.25 - alpha2) ** 2
        return alpha4 >= bound - tol
    raise ConfigError(f"order p must be 2 or 4, got {p}")


@dataclass(frozen=True, kw_only=True)
class UnconditionalReport:
    max_modulus: float
    kh_at_max: float
    z_at_max: float
    region_holds: bool
    within_unit_circle: bool
    """max |a| <= 1 + tol over the sampled grid"""
    max_corrector: float | None = None
    """max |R| over k != 0 for the predictor-corrector scheme"""


def verify_unconditional(
    config: SymbolConfig,
    *,
    n_k: int = 256,
    n_z: int = 64,
    z_range: tuple[float, float] = (1e-4, 1e4),
    tol: float = 1e-12,
) -> UnconditionalReport:
    """Sample |a| over the Brillouin zone and log-spaced z = dt^2 with h = c = 1."""
    kh = np.linspace(0.0, np.pi, n_k)
    z = np.logspace(np.log10(z_range[0]), np.log10(z_range[1]), n_z)
    K, Z = np.meshgrid(kh, z, indexing="ij")
    sp = fourier_symbols(K, 1.0, 1.0, np.sqrt(Z), config)
    quad = amplification(sp, config)
    mod = quad.max_modulus
    i, j = np.unravel_index(int(np.argmax(mod)), mod.shape)
    max_mod = float(mod[i, j])
    report = UnconditionalReport(
        max_modulus=max_mod,
        kh_at_max=float(kh[i]),
        z_at_max=float(z[j]),
        region_holds=stability_region(config.p, config.alpha2, config.alpha4),
        within_unit_circle=max_mod <= 1.0 + tol,
        max_corrector=None if quad.r_hat is None else float(np.max(np.abs(quad.r_hat[1:]))),
    )
    if report.max_corrector is not None and report.max_corrector >= 1.0:
        logger.warning("corrector factor reaches |R| = %.6g for k != 0", report.max_corrector)
    if report.region_holds and not report.within_unit_circle:
        logger.warning(
            "max |a| = %.15g at kh=%.4g, z=%.4g inside the stability region",
            max_mod,
            report.kh_at_max,
            report.z_at_max,
        )
    return report


def max_amplification(config: SymbolConfig, cfl: float, *, n_k: int = 256) -> tuple[float, float]:
    """Max |a| over the Brillouin zone at a fixed CFL number; returns (max, kh)."""
    kh = np.linspace(0.0, np.pi, n_k)
    sp = fourier_symbols(kh, 1.0, 1.0, cfl, config)
    mod = amplification(sp, config).max_modulus
    i = int(np.argmax(mod))
    return float(mod[i]), float(kh[i])


@dataclass(frozen=True, kw_only=True)
class GksReport:
    lam: float
    alpha2: float
    theta: FloatArray
    root_moduli: FloatArray
    """|a+|, |a-| per theta, shape (n_theta, 2)"""
    max_unit_deviation: float
    kappa_left: ComplexArray
    """(kappa_L+, kappa_L-) per sampled |a| > 1"""
    kappa_right: ComplexArray
    max_interface_product: float
    """max |kappa_L+ kappa_R+| over the sampled |a| > 1"""
    max_product_error: float
    """max |kappa_+ kappa_- - 1| over both sides"""
    precondition_ok: bool

    @property
    def unit_circle_ok(self) -> bool:
        return self.max_unit_deviation <= 1e-10

    @property
    def interface_ok(self) -> bool:
        return self.max_interface_product < 1.0


def _kappa_pair(b: ComplexArray) -> ComplexArray:
    disc = np.sqrt(b * b - 1.0 + 0j)
    k1, k2 = b + disc, b - disc
    large = np.where(np.abs(k1) >= np.abs(k2), k1, k2)
    # product of the roots is 1
    return np.stack([1.0 / large, large], axis=-1)


def gks_check(
    lam: float,
    alpha2: float,
    n_theta: int = 10_000,
    *,
    radii: Sequence[float] = (1.0001, 1.001, 1.01, 1.1, 2.0, 10.0),
    n_phase: int = 128,
) -> GksReport:
    """Normal-mode check of an explicit (left) / implicit (right) interface at CFL ``lam``."""
    case_i = lam < 1.0 and alpha2 >= 0.0
    case_ii = lam > 0.0 and alpha2 >= 0.25
    if not (case_i or case_ii):
        logger.warning("lambda=%g, alpha2=%g is outside both covered parameter cases", lam, alpha2)

    theta = (np.arange(n_theta) + 0.5) * (2.0 * np.pi / n_theta)
    s = 4.0 * lam**2 * np.sin(theta / 2.0) ** 2
    b = (1.0 - (0.5 - alpha2) * s) / (1.0 + alpha2 * s)
    a_plus, a_minus = _roots(b, np.ones_like(b))
    moduli = np.stack([np.abs(a_plus), np.abs(a_minus)], axis=-1)

    phase = np.linspace(0.0, 2.0 * np.pi, n_phase, endpoint=False)
    a = (np.asarray(radii)[:, None] * np.exp(1j * phase)[None, :]).ravel()
    shift = a - 2.0 + 1.0 / a
    b_left = 1.0 + shift / (2.0 * lam**2)
    b_right = 1.0 + shift / (2.0 * lam**2 * (alpha2 * a + 1.0 - 2.0 * alpha2 + alpha2 / a))
    kl, kr = _kappa_pair(b_left), _kappa_pair(b_right)
    product_error = max(
        float(np.max(np.abs(kl[:, 0] * kl[:, 1] - 1.0))),
        float(np.max(np.abs(kr[:, 0] * kr[:, 1] - 1.0))),
    )
    return GksReport(
        lam=lam,
        alpha2=alpha2,
        theta=theta,
        root_moduli=moduli,
        max_unit_deviation=float(np.max(np.abs(moduli - 1.0))),
        kappa_left=kl,
        kappa_right=kr,
        max_interface_product=float(np.max(np.abs(kl[:, 0] * kr[:, 0]))),
        max_product_error=product_error,
        precondition_ok=case_i or case_ii,
    )


def amplification_surface(
    config: SymbolConfig, kh_values: ArrayLike, z_values: ArrayLike
) -> list[tuple[float, float, float, float]]:
    """Rows (kh, z, |a+|, |a-|) with h = c = 1."""
    kh = np.asarray(kh_values, dtype=np.float64)
    z = np.asarray(z_values, dtype=np.float64)
    K, Z = np.meshgrid(kh, z, indexing="ij")
    amp = amplification(fourier_symbols(K, 1.0, 1.0, np.sqrt(Z), config), config)
    return [
        (float(k), float(zz), float(ap), float(am))
        for k, zz, ap, am in zip(K.ravel(), Z.ravel(), np.abs(amp.a_plus).ravel(), np.abs(amp.a_minus).ravel())
    ]
