"""Stochastic incident flow and per-patch aerodynamic forces.

The incident velocity is a base vector plus a sine modulation plus per-axis
Gaussian noise, all scaled by a uniform multiplicative perturbation; each
term can be zeroed independently.  The force on a patch follows the dynamic
pressure model: 0.5 * rho * |v_rel|^2 * A * (C_D n + C_F t + C_L d x n)
with the normal oriented downstream (n . d >= 0), t the unit tangential
projection of the flow direction, and the lift direction d x n left
unnormalized so it vanishes at normal incidence.
"""

from dataclasses import dataclass, field

import numpy as np

from . import mpm
from .errors import ConfigError

# Relative speeds below this produce no force (direction undefined).
RELATIVE_SPEED_FLOOR = 1e-9

# Tangential projections shorter than this count as pure normal incidence.
TANGENT_FLOOR = 1e-9


@dataclass
class FlowField:
    """Incident flow description.

    fluid_density: kg/m^3 (1.225 is sea-level air)
    base_velocity / sine_amplitude: m/s vectors
    sine_frequency: rad/s
    gaussian_sigma: per-axis noise std dev, m/s
    uniform_delta: multiplicative perturbation half-width (dimensionless)
    """

    fluid_density: float = 1.225
    base_velocity: np.ndarray = field(default_factory=lambda: np.zeros(3))
    sine_amplitude: np.ndarray = field(default_factory=lambda: np.zeros(3))
    sine_frequency: float = 1.0
    gaussian_sigma: float = 0.3
    uniform_delta: float = 0.3
    seed: int = 0

    def __post_init__(self):
        self.base_velocity = np.asarray(self.base_velocity, dtype=float)
        self.sine_amplitude = np.asarray(self.sine_amplitude, dtype=float)
        if self.fluid_density <= 0.0:
            raise ConfigError("fluid density must be positive")
        if self.gaussian_sigma < 0.0 or self.uniform_delta < 0.0:
            raise ConfigError("noise magnitudes must be nonnegative")

    def make_rng(self):
        return np.random.default_rng(self.seed)


@dataclass
class AeroCoefficients:
    """Dimensionless drag / friction / lift responses."""

    drag: float = 0.0
    friction: float = 0.0
    lift: float = 0.0

    def __post_init__(self):
        if min(self.drag, self.friction, self.lift) < 0.0:
            raise ConfigError("aero coefficients must be nonnegative")


def sample_flow(flow, t, rng):
    """Incident velocity at time t.

    Draw order is fixed (three normals then one uniform) so a given seed
    reproduces the same sequence regardless of parameter values.
    """
    noise = rng.normal(0.0, flow.gaussian_sigma, size=3)
    eps = rng.uniform(-flow.uniform_delta, flow.uniform_delta)
    v = (
        flow.base_velocity
        + flow.sine_amplitude * np.sin(flow.sine_frequency * t)
        + noise
    )
    return v * (1.0 + eps)


def tangential_direction(d, n):
    """Unit projection of flow direction d onto the plane orthogonal to n.

    Returns the zero vector at (near-)normal incidence, where the friction
    term has no defined direction and vanishes.
    """
    d = np.asarray(d, dtype=float)
    n = np.asarray(n, dtype=float)
    t = d - (d @ n) * n
    norm = np.linalg.norm(t)
    if norm <= TANGENT_FLOOR:
        return np.zeros(3)
    return t / norm


def patch_force(normal, area, patch_velocity, flow_velocity, fluid_density, coeffs, cos_attenuation=False):
    """Aerodynamic force (N) on a single patch.

    ``cos_attenuation`` scales by the incidence cosine n . d (an optional
    projected-area correction; the plain dynamic-pressure model has none).
    """
    v_rel = np.asarray(flow_velocity, dtype=float) - np.asarray(
        patch_velocity, dtype=float
    )
    speed = np.linalg.norm(v_rel)
    if speed < RELATIVE_SPEED_FLOOR:
        return np.zeros(3)
    d = v_rel / speed
    n = np.asarray(normal, dtype=float)
    if n @ d < 0.0:
        n = -n
    pressure = 0.5 * fluid_density * speed * speed * area
    if cos_attenuation:
        pressure *= n @ d
    return pressure * (
        coeffs.drag * n
        + coeffs.friction * tangential_direction(d, n)
        + coeffs.lift * np.cross(d, n)
    )


def patch_forces(normals, areas, patch_velocities, flow_velocity, fluid_density, coeffs, active=None, cos_attenuation=False):
    """Vectorized per-patch forces; rows outside ``active`` are zero."""
    normals = np.asarray(normals, dtype=float)
    velocities = np.asarray(patch_velocities, dtype=float)
    n_patches = normals.shape[0]
    forces = np.zeros((n_patches, 3))
    if active is None:
        active = np.ones(n_patches, dtype=bool)
    v_rel = np.asarray(flow_velocity, dtype=float) - velocities
    speed = np.linalg.norm(v_rel, axis=1)
    live = active & (speed >= RELATIVE_SPEED_FLOOR)
    if not np.any(live):
        return forces
    d = v_rel[live] / speed[live, None]
    n = normals[live].copy()
    flip = np.einsum("na,na->n", n, d) < 0.0
    n[flip] = -n[flip]
    tang = d - np.einsum("na,na->n", d, n)[:, None] * n
    tnorm = np.linalg.norm(tang, axis=1, keepdims=True)
    tang = np.where(tnorm > TANGENT_FLOOR, tang / np.where(tnorm > 0, tnorm, 1.0), 0.0)
    pressure = 0.5 * fluid_density * speed[live] ** 2 * np.asarray(areas)[live]
    if cos_attenuation:
        pressure = pressure * np.einsum("na,na->n", n, d)
    forces[live] = pressure[:, None] * (
        coeffs.drag * n + coeffs.friction * tang + coeffs.lift * np.cross(d, n)
    )
    return forces


def aero_particle_forces(world, patches, particles, flow_velocity, flow, coeffs, surface_only=True, areas=None, cos_attenuation=False):
    """Per-particle aerodynamic forces for the current frame.

    Only particles flagged ``is_surface`` receive force when
    ``surface_only`` is set; interior particles stay untouched, which is
    the intended behavior for filled solids.  ``areas`` overrides the
    frozen rest areas (for the world-area tracking switch).
    """
    active = particles.is_surface if surface_only else np.ones(len(particles), dtype=bool)
    return patch_forces(
        world.normal,
        patches.area if areas is None else areas,
        particles.v,
        flow_velocity,
        flow.fluid_density,
        coeffs,
        active=active,
        cos_attenuation=cos_attenuation,
    )


def apply_aero_to_grid(world, patches, particles, grid, flow, coeffs, t, rng, surface_only=True):
    """Sample the flow, compute patch forces, scatter them onto the grid.

    Returns the per-particle force array that was injected, so callers can
    reuse it across the substeps of a frame.
    """
    flow_velocity = sample_flow(flow, t, rng)
    forces = aero_particle_forces(
        world, patches, particles, flow_velocity, flow, coeffs, surface_only
    )
    mpm.inject_external_forces(particles, grid, forces)
    return forces
