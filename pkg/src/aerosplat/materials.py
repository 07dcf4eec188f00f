"""Constitutive models: fixed corotated elasticity and Drucker-Prager plasticity.

Stress is returned as Kirchhoff stress tau = det(F) * cauchy, the measure the
grid force sum consumes directly.  The Drucker-Prager return map projects the
log singular values of the elastic deformation gradient onto a friction-cone
yield surface; elastic stress for sand reuses the fixed corotated model, the
plasticity enters only through the return map applied after each deformation
update.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DegenerateMatrixError
from .mat3 import IDENTITY, polar_rotation, svd3, svd3_batch

FIXED_COROTATED = "fixed_corotated"
DRUCKER_PRAGER = "drucker_prager"


@dataclass
class MaterialParams:
    """Material selector plus engineering constants.

    model: "fixed_corotated" or "drucker_prager"
    young_modulus: E in Pa
    poisson_ratio: nu, dimensionless, in [0, 0.5)
    density: rho in kg/m^3
    friction_angle_deg: friction angle in degrees (Drucker-Prager only)
    """

    model: str = FIXED_COROTATED
    young_modulus: float = 3e3
    poisson_ratio: float = 0.3
    density: float = 30.0
    friction_angle_deg: float = 30.0

    def __post_init__(self):
        if self.model not in (FIXED_COROTATED, DRUCKER_PRAGER):
            raise ConfigError(f"unknown constitutive model {self.model!r}")
        if self.young_modulus <= 0.0:
            raise ConfigError("Young's modulus must be positive")
        if not 0.0 <= self.poisson_ratio < 0.5:
            raise ConfigError("Poisson ratio must lie in [0, 0.5)")
        if self.density <= 0.0:
            raise ConfigError("density must be positive")
        if self.model == DRUCKER_PRAGER and not 0.0 < self.friction_angle_deg < 90.0:
            raise ConfigError("friction angle must lie in (0, 90) degrees")

    @property
    def lame(self):
        return lame_from_young_poisson(self.young_modulus, self.poisson_ratio)


@dataclass(frozen=True)
class LameParams:
    """Shear modulus mu and first Lame parameter lam, both in Pa."""

    mu: float
    lam: float


def lame_from_young_poisson(young_modulus, poisson_ratio):
    """Standard conversion (E, nu) -> (mu, lambda)."""
    if young_modulus <= 0.0:
        raise ConfigError("Young's modulus must be positive")
    if not 0.0 <= poisson_ratio < 0.5:
        raise ConfigError("Poisson ratio must lie in [0, 0.5)")
    mu = young_modulus / (2.0 * (1.0 + poisson_ratio))
    lam = (
        young_modulus
        * poisson_ratio
        / ((1.0 + poisson_ratio) * (1.0 - 2.0 * poisson_ratio))
    )
    return LameParams(mu=mu, lam=lam)


def fixed_corotated_kirchhoff(f_elastic, lame):
    """Kirchhoff stress 2 mu (F - R) F^T + lambda (J - 1) J I.

    R is the polar rotation of F and J its determinant; requires J > 0.
    """
    f = np.asarray(f_elastic, dtype=float)
    j = np.linalg.det(f)
    if j <= 0.0:
        raise DegenerateMatrixError(f"fixed corotated stress needs det(F) > 0, got {j:g}")
    r = polar_rotation(f)
    return 2.0 * lame.mu * (f - r) @ f.T + lame.lam * (j - 1.0) * j * IDENTITY


def fixed_corotated_kirchhoff_batch(f_elastic, lame):
    """Batched stress evaluation for (n, 3, 3) deformation gradients."""
    f = np.asarray(f_elastic, dtype=float)
    u, s, v = svd3_batch(f)
    # With det(U) = det(V) = +1 the singular-value product is det(F).
    j = s.prod(axis=-1)
    if np.any(j <= 0.0):
        bad = int(np.argmax(j <= 0.0))
        raise DegenerateMatrixError(
            f"fixed corotated stress needs det(F) > 0, particle {bad} has {j[bad]:g}"
        )
    r = u @ np.swapaxes(v, -1, -2)
    ft = np.swapaxes(f, -1, -2)
    tau = 2.0 * lame.mu * (f - r) @ ft
    vol = lame.lam * (j - 1.0) * j
    tau[..., 0, 0] += vol
    tau[..., 1, 1] += vol
    tau[..., 2, 2] += vol
    return tau


def drucker_prager_alpha(friction_angle_deg):
    """Friction coefficient sqrt(2/3) * 2 sin(phi) / (3 - sin(phi))."""
    s = math.sin(math.radians(friction_angle_deg))
    return math.sqrt(2.0 / 3.0) * 2.0 * s / (3.0 - s)


def _return_map_sigma(sigma, lame, alpha):
    # Three-way projection in log-strain space; sigma entries must be > 0.
    eps = np.log(sigma)
    trace = eps.sum(axis=-1, keepdims=True)
    eps_hat = eps - trace / 3.0
    hat_norm = np.linalg.norm(eps_hat, axis=-1, keepdims=True)
    delta_gamma = hat_norm + alpha * (3.0 * lame.lam + 2.0 * lame.mu) * trace / (
        2.0 * lame.mu
    )
    expanding = trace > 0.0
    elastic = (delta_gamma <= 0.0) & ~expanding
    safe_norm = np.where(hat_norm > 0.0, hat_norm, 1.0)
    projected = np.exp(eps - delta_gamma * eps_hat / safe_norm)
    out = np.where(expanding, 1.0, np.where(elastic, sigma, projected))
    return out


def drucker_prager_return_map(f_elastic, lame, alpha, sigma_floor=1e-6):
    """Project an elastic deformation gradient back onto the yield surface.

    Singular values are clamped to ``sigma_floor`` before taking logarithms;
    nonpositive singular values (det <= 0) raise DegenerateMatrixError.
    """
    f = np.asarray(f_elastic, dtype=float)
    u, s, v = svd3(f)
    if np.any(s <= 0.0):
        raise DegenerateMatrixError("return map needs positive singular values")
    s = np.maximum(s, sigma_floor)
    z = _return_map_sigma(s, lame, alpha)
    return (u * z) @ v.T


def drucker_prager_return_map_batch(f_elastic, lame, alpha, sigma_floor=1e-6):
    """Batched :func:`drucker_prager_return_map` for (n, 3, 3) arrays."""
    f = np.asarray(f_elastic, dtype=float)
    u, s, v = svd3_batch(f)
    if np.any(s <= 0.0):
        bad = int(np.argmax(np.any(s <= 0.0, axis=-1)))
        raise DegenerateMatrixError(
            f"return map needs positive singular values (particle {bad})"
        )
    s = np.maximum(s, sigma_floor)
    z = _return_map_sigma(s, lame, alpha)
    return (u * z[..., None, :]) @ np.swapaxes(v, -1, -2)


def kirchhoff_stress_batch(f_elastic, material):
    """Per-particle Kirchhoff stress for the configured material model."""
    return fixed_corotated_kirchhoff_batch(f_elastic, material.lame)


def apply_plasticity_batch(f_trial, material):
    """Return-map hook applied after each deformation-gradient update."""
    if material.model == DRUCKER_PRAGER:
        alpha = drucker_prager_alpha(material.friction_angle_deg)
        return drucker_prager_return_map_batch(f_trial, material.lame, alpha)
    return f_trial
