"""CPU splat rasterizer with lightweight shading.

Pipeline per frame: shade each patch (diffuse or Phong, per patch, not per
pixel), project patch centers and covariances through a pinhole camera,
depth-sort, then alpha-blend front to back.  Sorting uses the full splat
content as tie-breakers so the result is independent of input order.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .errors import ConfigError
from .ppm import write_ppm

DIFFUSE = "diffuse"
PHONG = "phong"

# Compositing constants: opacity clamp, minimum contributing alpha, and the
# transmittance early-out threshold.
ALPHA_CLAMP = 0.99
ALPHA_MIN = 1.0 / 255.0
TRANSMITTANCE_MIN = 1e-4

# Isotropic 2D covariance floor (px^2) against sub-pixel aliasing holes.
COV_FLOOR_PX2 = 0.3


@dataclass
class Camera:
    """Pinhole camera; vertical field of view in degrees."""

    position: np.ndarray
    look_at: np.ndarray
    up: np.ndarray = field(default_factory=lambda: np.array([0.0, 1.0, 0.0]))
    fov_y_deg: float = 40.0
    width: int = 640
    height: int = 360
    near: float = 0.01

    def __post_init__(self):
        self.position = np.asarray(self.position, dtype=float)
        self.look_at = np.asarray(self.look_at, dtype=float)
        self.up = np.asarray(self.up, dtype=float)
        if self.width <= 0 or self.height <= 0:
            raise ConfigError("image dimensions must be positive")
        if not 0.0 < self.fov_y_deg < 180.0:
            raise ConfigError("field of view must lie in (0, 180) degrees")

    def basis(self):
        """Rows (right, up, forward) of the world-to-camera rotation."""
        forward = self.look_at - self.position
        norm = np.linalg.norm(forward)
        if norm == 0.0:
            raise ConfigError("camera position and look-at coincide")
        forward = forward / norm
        right = np.cross(forward, self.up)
        rnorm = np.linalg.norm(right)
        if rnorm < 1e-12:
            raise ConfigError("camera up vector is parallel to the view direction")
        right = right / rnorm
        up = np.cross(right, forward)
        return np.stack([right, up, forward])

    @property
    def focal_px(self):
        return (self.height / 2.0) / math.tan(math.radians(self.fov_y_deg) / 2.0)


@dataclass
class LightConfig:
    """Directional light and Phong coefficients.

    direction: unit vector toward the light
    ambient/diffuse/specular: k_a, k_d, k_s weights
    shininess: specular exponent
    ambient_radiance/incident_radiance: L_a, L_i scalars
    """

    direction: np.ndarray = field(default_factory=lambda: np.array([0.0, 0.0, 1.0]))
    ambient: float = 0.1
    diffuse: float = 1.0
    specular: float = 0.0
    shininess: float = 16.0
    ambient_radiance: float = 1.0
    incident_radiance: float = 1.0

    def __post_init__(self):
        self.direction = np.asarray(self.direction, dtype=float)
        norm = np.linalg.norm(self.direction)
        if norm == 0.0:
            raise ConfigError("light direction cannot be zero")
        self.direction = self.direction / norm
        for name in ("ambient", "diffuse", "specular", "ambient_radiance", "incident_radiance"):
            if getattr(self, name) < 0.0:
                raise ConfigError(f"light coefficient {name} must be nonnegative")


def diffuse_shade(normal, light_dir):
    """Clamped Lambert term max(0, n . L); broadcasts over leading axes."""
    dot = np.einsum("...a,a->...", np.asarray(normal, dtype=float), light_dir)
    return np.maximum(dot, 0.0)


def reflect(normal, incident):
    """Reflection of the incident direction about the normal."""
    n = np.asarray(normal, dtype=float)
    w = np.asarray(incident, dtype=float)
    return 2.0 * np.einsum("...a,...a->...", n, w)[..., None] * n - w


def shade_patch(color0, normal, mode, light, view_dir=None):
    """Shaded RGB for patches; ``mode`` is "diffuse" or "phong".

    Diffuse: c0 scaled by the Lambert term.  Phong: ambient plus diffuse
    plus a colorless specular lobe toward ``view_dir`` (required then),
    all clamped at zero before exponentiation.
    """
    color0 = np.asarray(color0, dtype=float)
    if mode == DIFFUSE:
        return color0 * diffuse_shade(normal, light.direction)[..., None]
    if mode != PHONG:
        raise ConfigError(f"unknown shading mode {mode!r}")
    if view_dir is None:
        raise ConfigError("phong shading needs a view direction")
    lambert = diffuse_shade(normal, light.direction)
    r = reflect(normal, light.direction)
    spec_dot = np.maximum(
        np.einsum("...a,...a->...", r, np.asarray(view_dir, dtype=float)), 0.0
    )
    ambient = light.ambient * light.ambient_radiance
    diffuse = light.diffuse * lambert[..., None] * light.incident_radiance * color0
    specular = light.specular * spec_dot**light.shininess
    return ambient + diffuse + specular[..., None]


def project_patches(positions, covariances, camera, cov_floor_px2=COV_FLOOR_PX2):
    """Project patch centers and covariances to the image plane.

    Returns (means_px (n, 2), cov2d (n, 2, 2), depth (n,), keep (n,) bool);
    entries failing the near-plane or 3 sigma screen-bounds tests have
    keep=False and undefined values.
    """
    positions = np.asarray(positions, dtype=float)
    rot = camera.basis()
    cam = (positions - camera.position) @ rot.T
    depth = cam[:, 2]
    keep = depth > camera.near
    focal = camera.focal_px
    cx = camera.width / 2.0
    cy = camera.height / 2.0
    safe_z = np.where(keep, depth, 1.0)
    means = np.empty((positions.shape[0], 2))
    means[:, 0] = cx + focal * cam[:, 0] / safe_z
    means[:, 1] = cy - focal * cam[:, 1] / safe_z
    # Projection Jacobian at the center, in camera coordinates, rows d(px,
    # py)/d(cam xyz); the image y axis points down.
    jac = np.zeros((positions.shape[0], 2, 3))
    jac[:, 0, 0] = focal / safe_z
    jac[:, 0, 2] = -focal * cam[:, 0] / safe_z**2
    jac[:, 1, 1] = -focal / safe_z
    jac[:, 1, 2] = focal * cam[:, 1] / safe_z**2
    jac_world = jac @ rot
    cov2d = jac_world @ np.asarray(covariances, dtype=float) @ np.swapaxes(jac_world, -1, -2)
    cov2d[:, 0, 0] += cov_floor_px2
    cov2d[:, 1, 1] += cov_floor_px2
    # Symmetrize against rounding drift before inversion downstream.
    cov2d[:, 0, 1] = cov2d[:, 1, 0] = 0.5 * (cov2d[:, 0, 1] + cov2d[:, 1, 0])
    trace = cov2d[:, 0, 0] + cov2d[:, 1, 1]
    half_gap = np.sqrt(
        0.25 * (cov2d[:, 0, 0] - cov2d[:, 1, 1]) ** 2 + cov2d[:, 0, 1] ** 2
    )
    radius = 3.0 * np.sqrt(np.maximum(0.5 * trace + half_gap, 0.0))
    keep &= means[:, 0] + radius >= 0.0
    keep &= means[:, 0] - radius <= camera.width
    keep &= means[:, 1] + radius >= 0.0
    keep &= means[:, 1] - radius <= camera.height
    return means, cov2d, depth, keep


def splat_order(depth, means, colors, opacities):
    """Front-to-back ordering, independent of input permutation.

    Primary key is depth; content columns break ties so identical depths
    still sort deterministically.
    """
    keys = (
        opacities,
        colors[:, 2],
        colors[:, 1],
        colors[:, 0],
        means[:, 1],
        means[:, 0],
        depth,
    )
    return np.lexsort(keys)


def composite(means, cov2d, colors, opacities, depth, width, height):
    """Alpha-blend splats over a black background (front to back)."""
    image = np.zeros((height, width, 3))
    if means.shape[0] == 0:
        return image
    order = splat_order(depth, means, colors, opacities)
    _kernels.composite_splats(
        np.ascontiguousarray(means[order]),
        np.ascontiguousarray(cov2d[order]),
        np.ascontiguousarray(np.asarray(colors, dtype=float)[order]),
        np.ascontiguousarray(np.asarray(opacities, dtype=float)[order]),
        image,
        ALPHA_CLAMP,
        ALPHA_MIN,
        TRANSMITTANCE_MIN,
    )
    return image


def render_frame(world_positions, covariances, normals, colors0, opacities, camera, light, mode=DIFFUSE):
    """Shade, project, and composite one frame; returns the float image."""
    if mode == PHONG:
        view = camera.position - np.asarray(world_positions, dtype=float)
        view /= np.linalg.norm(view, axis=1, keepdims=True)
        colors = shade_patch(colors0, normals, mode, light, view_dir=view)
    else:
        colors = shade_patch(colors0, normals, mode, light)
    means, cov2d, depth, keep = project_patches(world_positions, covariances, camera)
    return composite(
        means[keep],
        cov2d[keep],
        np.asarray(colors, dtype=float)[keep],
        np.asarray(opacities, dtype=float)[keep],
        depth[keep],
        camera.width,
        camera.height,
    )


def write_frame(image, path):
    """Write one frame as binary PPM (P6), atomically."""
    write_ppm(image, path)


def frame_filename(index):
    return f"frame_{index:04d}.ppm"
