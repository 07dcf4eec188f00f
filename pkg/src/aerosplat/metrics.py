"""Image and point-set comparison metrics.

PSNR uses MAX = 1 for float images and returns +inf when the mean squared
error is below 1e-12.  Chamfer distance is the symmetric mean-of-squared
nearest-neighbor convention:

    CD(A, B) = mean_a min_b |a - b|^2 + mean_b min_a |a - b|^2

computed by chunked brute force (point sets here are desk scale).
"""

import math

import numpy as np

MSE_FLOOR = 1e-12


def psnr(pred, ref):
    """Peak signal-to-noise ratio in dB between two float images."""
    pred = np.asarray(pred, dtype=float)
    ref = np.asarray(ref, dtype=float)
    if pred.shape != ref.shape:
        raise ValueError(f"image shapes differ: {pred.shape} vs {ref.shape}")
    mse = float(np.mean((pred - ref) ** 2))
    if mse < MSE_FLOOR:
        return math.inf
    return 10.0 * math.log10(1.0 / mse)


def _directed_sq_distances(a, b, chunk=512):
    # min over b of |a - b|^2 for each a, without forming huge matrices.
    out = np.empty(a.shape[0])
    for start in range(0, a.shape[0], chunk):
        block = a[start : start + chunk]
        d2 = ((block[:, None, :] - b[None, :, :]) ** 2).sum(axis=2)
        out[start : start + chunk] = d2.min(axis=1)
    return out


def chamfer(points_a, points_b):
    """Symmetric mean squared nearest-neighbor distance (m^2)."""
    a = np.asarray(points_a, dtype=float).reshape(-1, 3)
    b = np.asarray(points_b, dtype=float).reshape(-1, 3)
    if a.shape[0] == 0 or b.shape[0] == 0:
        raise ValueError("chamfer distance needs nonempty point sets")
    return float(
        _directed_sq_distances(a, b).mean() + _directed_sq_distances(b, a).mean()
    )
