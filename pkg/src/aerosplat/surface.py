"""Gaussian surface patches: area, normals, and world-space transport.

A patch is an anisotropic Gaussian treated as an oriented surface element:
its area is pi * S1 * S2 (the two largest scalings) and its normal points
along the smallest scaling axis.  Under a local affine deformation F the
covariance transports as F A F^T and the normal by the inverse transpose,
renormalized.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DegenerateMatrixError
from .mat3 import det3, inv_transpose, inv_transpose_batch


@dataclass
class Patches:
    """Structure-of-arrays rest-state patch set.

    rest_x: rest positions (n, 3) m
    scaling: (n, 3) m, sorted descending per patch
    rest_rotation: (n, 3, 3) orthonormal, columns are the patch axes
    opacity: (n,) in [0, 1]
    color: intrinsic RGB (n, 3) in [0, 1]
    rest_normal: (n, 3) unit vectors
    area: (n,) m^2, frozen at rest (pi * S1 * S2)
    """

    rest_x: np.ndarray
    scaling: np.ndarray
    rest_rotation: np.ndarray
    opacity: np.ndarray
    color: np.ndarray
    rest_normal: np.ndarray
    area: np.ndarray

    def __len__(self):
        return self.rest_x.shape[0]

    def rest_covariance(self):
        """Rest covariance R diag(S^2) R^T per patch, (n, 3, 3)."""
        s2 = self.scaling**2
        return (self.rest_rotation * s2[:, None, :]) @ np.swapaxes(
            self.rest_rotation, -1, -2
        )

    def select(self, indices):
        return Patches(
            rest_x=self.rest_x[indices].copy(),
            scaling=self.scaling[indices].copy(),
            rest_rotation=self.rest_rotation[indices].copy(),
            opacity=self.opacity[indices].copy(),
            color=self.color[indices].copy(),
            rest_normal=self.rest_normal[indices].copy(),
            area=self.area[indices].copy(),
        )


@dataclass
class WorldPatches:
    """Patches transported to world space for one frame."""

    x: np.ndarray  # (n, 3) m
    cov: np.ndarray  # (n, 3, 3) m^2
    normal: np.ndarray  # (n, 3) unit


def patch_area(scaling):
    """Surface area pi * S1 * S2 of a descending-sorted scaling triple."""
    s = np.asarray(scaling, dtype=float)
    if not (s[0] >= s[1] >= s[2] > 0.0):
        raise ConfigError(f"scaling must be sorted descending and positive, got {s}")
    return math.pi * s[0] * s[1]


def rest_normal(rotation, scaling):
    """Rotation column paired with the smallest scaling.

    Ties among minima resolve to the highest index (so a fully isotropic
    patch uses the third column).
    """
    rotation = np.asarray(rotation, dtype=float)
    s = np.asarray(scaling, dtype=float)
    minima = np.flatnonzero(s == s.min())
    return rotation[:, minima[-1]].copy()


def transport_patch(rest_cov, rest_n, f, position):
    """World state of one patch under deformation gradient ``f``.

    Covariance maps as F A F^T, the normal as normalize(F^{-T} N).
    """
    f = np.asarray(f, dtype=float)
    if np.linalg.det(f) <= 0.0:
        raise DegenerateMatrixError("patch transport needs det(F) > 0")
    cov = f @ rest_cov @ f.T
    n = inv_transpose(f) @ np.asarray(rest_n, dtype=float)
    n /= np.linalg.norm(n)
    return np.asarray(position, dtype=float), cov, n


def transport_all(patches, positions, f_grads, previous_normals=None):
    """Transport every patch; optionally keep normal signs frame-coherent.

    When ``previous_normals`` is given, each new normal is flipped if that
    reduces its angle to the previous frame's normal, preventing sign
    flicker near degenerate stretches.
    """
    f = np.asarray(f_grads, dtype=float)
    cov = f @ patches.rest_covariance() @ np.swapaxes(f, -1, -2)
    n = np.einsum(
        "nab,nb->na", inv_transpose_batch(f), patches.rest_normal
    )
    n /= np.linalg.norm(n, axis=1, keepdims=True)
    if previous_normals is not None:
        flip = np.einsum("na,na->n", n, previous_normals) < 0.0
        n[flip] = -n[flip]
    return WorldPatches(x=np.asarray(positions, dtype=float).copy(), cov=cov, normal=n)


def world_areas(patches, f_grads):
    """Deformed patch areas via the surface-element relation
    da = det(F) * |F^{-T} N| dA.

    Rest areas are the default for force computation; this correction is
    offered behind a config switch for experimentation.
    """
    f = np.asarray(f_grads, dtype=float)
    j = det3(f)
    if np.any(j <= 0.0):
        raise DegenerateMatrixError("world areas need det(F) > 0")
    n_t = np.einsum("nab,nb->na", inv_transpose_batch(f), patches.rest_normal)
    return patches.area * j * np.linalg.norm(n_t, axis=1)


def opacity_filter(opacities, threshold):
    """Indices of patches with opacity >= threshold, order preserved."""
    if not 0.0 <= threshold <= 1.0:
        raise ConfigError("opacity threshold must lie in [0, 1]")
    return np.flatnonzero(np.asarray(opacities) >= threshold)


def frame_from_normal(direction):
    """Orthonormal rotation whose third column is the given direction."""
    n = np.asarray(direction, dtype=float)
    n = n / np.linalg.norm(n)
    helper = np.array([1.0, 0.0, 0.0])
    if abs(n[0]) > 0.9:
        helper = np.array([0.0, 1.0, 0.0])
    t1 = np.cross(helper, n)
    t1 /= np.linalg.norm(t1)
    t2 = np.cross(n, t1)
    return np.stack([t1, t2, n], axis=1)


PATCH_DUMP_HEADER = (
    "# patch dump: x y z nx ny nz r g b opacity"
    " (positions m, unit normals, intrinsic color, one patch per line)"
)


def write_patch_dump(path, positions, normals, colors, opacities):
    """Plain-text patch table consumed by the renderer and metrics tooling."""
    rows = np.hstack(
        [positions, normals, colors, np.asarray(opacities)[:, None]]
    )
    with open(path, "w") as fh:
        fh.write(PATCH_DUMP_HEADER + "\n")
        for row in rows:
            fh.write(" ".join(f"{value:.17g}" for value in row) + "\n")


def read_patch_dump(path):
    """Read a patch dump; returns (positions, normals, colors, opacities)."""
    data = np.loadtxt(path, comments="#", ndmin=2)
    if data.shape[1] < 10:
        raise ValueError(f"{path}: expected 10 columns, got {data.shape[1]}")
    return (
        data[:, :3].copy(),
        data[:, 3:6].copy(),
        data[:, 6:9].copy(),
        data[:, 9].copy(),
    )
