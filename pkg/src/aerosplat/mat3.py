"""Deterministic 3x3 linear-algebra kernels.

All routines use float64 and a proper-rotation sign convention: the
orthogonal factors of the SVD always have determinant +1, with a negative
input determinant absorbed into the smallest singular value.  Batched
variants operate on arrays of shape (n, 3, 3) and are used by the hot
simulation paths; the scalar variants are the reference surface.
"""

import numpy as np

from .errors import DegenerateMatrixError, SingularMatrixError

IDENTITY = np.eye(3)


def svd3(m):
    """SVD of a 3x3 matrix with det(U) = det(V) = +1.

    Returns (u, sigma, v) with m = u @ diag(sigma) @ v.T, singular values
    sorted descending.  When det(m) < 0 the smallest singular value is
    negative; otherwise all are nonnegative.
    """
    m = np.asarray(m, dtype=float)
    u, s, vt = np.linalg.svd(m)
    v = vt.T
    s = s.copy()
    if np.linalg.det(u) < 0.0:
        u[:, 2] = -u[:, 2]
        s[2] = -s[2]
    if np.linalg.det(v) < 0.0:
        v[:, 2] = -v[:, 2]
        s[2] = -s[2]
    return u, s, v


def svd3_batch(m):
    """Vectorized :func:`svd3` for an (n, 3, 3) array."""
    m = np.asarray(m, dtype=float)
    u, s, vt = np.linalg.svd(m)
    v = np.swapaxes(vt, -1, -2)
    s = s.copy()
    flip_u = det3(u) < 0.0
    u[flip_u, :, 2] = -u[flip_u, :, 2]
    s[flip_u, 2] = -s[flip_u, 2]
    flip_v = det3(v) < 0.0
    v[flip_v, :, 2] = -v[flip_v, :, 2]
    s[flip_v, 2] = -s[flip_v, 2]
    return u, s, v


def polar_rotation(f):
    """Rotation factor R = U V^T of the polar decomposition of f.

    Requires det(f) > 0; raises DegenerateMatrixError otherwise.
    """
    f = np.asarray(f, dtype=float)
    if np.linalg.det(f) <= 0.0:
        raise DegenerateMatrixError(
            f"polar decomposition needs det > 0, got {np.linalg.det(f):g}"
        )
    u, _, v = svd3(f)
    return u @ v.T


def polar_rotation_batch(f):
    """Batched rotation factors for (n, 3, 3) deformation gradients."""
    f = np.asarray(f, dtype=float)
    dets = det3(f)
    if np.any(dets <= 0.0):
        bad = int(np.argmax(dets <= 0.0))
        raise DegenerateMatrixError(
            f"polar decomposition needs det > 0, entry {bad} has det {dets[bad]:g}"
        )
    u, _, v = svd3_batch(f)
    return u @ np.swapaxes(v, -1, -2)


def _adjugate_transpose(m):
    # Transposed adjugate = cofactor matrix, so inv(m).T = cof(m) / det(m).
    out = np.empty_like(m)
    out[..., 0, 0] = m[..., 1, 1] * m[..., 2, 2] - m[..., 1, 2] * m[..., 2, 1]
    out[..., 0, 1] = m[..., 1, 2] * m[..., 2, 0] - m[..., 1, 0] * m[..., 2, 2]
    out[..., 0, 2] = m[..., 1, 0] * m[..., 2, 1] - m[..., 1, 1] * m[..., 2, 0]
    out[..., 1, 0] = m[..., 0, 2] * m[..., 2, 1] - m[..., 0, 1] * m[..., 2, 2]
    out[..., 1, 1] = m[..., 0, 0] * m[..., 2, 2] - m[..., 0, 2] * m[..., 2, 0]
    out[..., 1, 2] = m[..., 0, 1] * m[..., 2, 0] - m[..., 0, 0] * m[..., 2, 1]
    out[..., 2, 0] = m[..., 0, 1] * m[..., 1, 2] - m[..., 0, 2] * m[..., 1, 1]
    out[..., 2, 1] = m[..., 0, 2] * m[..., 1, 0] - m[..., 0, 0] * m[..., 1, 2]
    out[..., 2, 2] = m[..., 0, 0] * m[..., 1, 1] - m[..., 0, 1] * m[..., 1, 0]
    return out


def det3(m):
    """Determinant via explicit cofactor expansion (batch friendly)."""
    m = np.asarray(m, dtype=float)
    return (
        m[..., 0, 0] * (m[..., 1, 1] * m[..., 2, 2] - m[..., 1, 2] * m[..., 2, 1])
        - m[..., 0, 1] * (m[..., 1, 0] * m[..., 2, 2] - m[..., 1, 2] * m[..., 2, 0])
        + m[..., 0, 2] * (m[..., 1, 0] * m[..., 2, 1] - m[..., 1, 1] * m[..., 2, 0])
    )


def inv_transpose(m, det_floor=1e-12):
    """Inverse transpose of a 3x3 matrix via adjugate / determinant.

    Raises SingularMatrixError when |det| falls below ``det_floor``.
    """
    m = np.asarray(m, dtype=float)
    d = det3(m)
    if abs(d) <= det_floor:
        raise SingularMatrixError(f"matrix is singular within floor {det_floor:g}")
    return _adjugate_transpose(m) / d


def inv_transpose_batch(m, det_floor=1e-12):
    """Batched :func:`inv_transpose` for (n, 3, 3) arrays."""
    m = np.asarray(m, dtype=float)
    d = det3(m)
    if np.any(np.abs(d) <= det_floor):
        bad = int(np.argmax(np.abs(d) <= det_floor))
        raise SingularMatrixError(
            f"entry {bad} is singular within floor {det_floor:g} (det {d[bad]:g})"
        )
    return _adjugate_transpose(m) / d[..., None, None]


def normalize(v, eps=0.0):
    """Unit vector along v; raises on (near-)zero length."""
    v = np.asarray(v, dtype=float)
    n = float(np.linalg.norm(v))
    if n <= eps:
        raise DegenerateMatrixError("cannot normalize a zero-length vector")
    return v / n
