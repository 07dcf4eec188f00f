"""Regularization losses over Gaussian scalings and opacities.

Standalone differentiable functions with analytic gradients for use by an
external training loop: an anisotropy hinge on the S1/S2 ratio, an opacity
entropy pushing toward 0 or 1, and a size hinge on S1.  Hinge subgradients
are 0 exactly at the kink; the entropy uses the natural logarithm with the
0 * log 0 = 0 convention.
"""

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError


@dataclass(frozen=True)
class LossParams:
    """Caps and combination weights.

    anisotropy_cap: maximum allowed S1/S2 ratio before penalty
    size_cap: maximum allowed S1 (m) before penalty
    weight_*: combination weights for the total
    """

    anisotropy_cap: float = 1.1
    size_cap: float = 0.008
    weight_anisotropy: float = 10.0
    weight_entropy: float = 0.01
    weight_size: float = 0.01

    def __post_init__(self):
        if self.anisotropy_cap < 1.0:
            raise ConfigError("anisotropy cap must be >= 1")
        if self.size_cap <= 0.0:
            raise ConfigError("size cap must be positive")
        if min(self.weight_anisotropy, self.weight_entropy, self.weight_size) < 0.0:
            raise ConfigError("loss weights must be nonnegative")


def anisotropy_loss(scalings, cap):
    """Mean hinge on S1/S2 - cap over (n, 2) scaling pairs.

    Returns (value, gradients) with gradients shaped like the input:
    d/dS1 = 1 / (n S2) and d/dS2 = -S1 / (n S2^2) where the hinge is
    strictly active, zero elsewhere (including at the kink).
    """
    s = np.asarray(scalings, dtype=float).reshape(-1, 2)
    if np.any(s[:, 1] <= 0.0) or np.any(s[:, 0] < s[:, 1]):
        raise ConfigError("scalings must satisfy S1 >= S2 > 0")
    n = s.shape[0]
    ratio = s[:, 0] / s[:, 1]
    active = ratio > cap
    value = float(np.where(active, ratio - cap, 0.0).mean())
    grads = np.zeros_like(s)
    grads[active, 0] = 1.0 / (n * s[active, 1])
    grads[active, 1] = -s[active, 0] / (n * s[active, 1] ** 2)
    return value, grads


def entropy_loss(opacities):
    """Mean opacity entropy -sigma * ln(sigma), zero at sigma in {0, 1}.

    Gradient is -(1 + ln sigma)/n for sigma > 0 and defined as 0 at
    sigma = 0 (the one-sided derivative diverges there).
    """
    sigma = np.asarray(opacities, dtype=float).reshape(-1)
    if np.any(sigma < 0.0) or np.any(sigma > 1.0):
        raise ConfigError("opacities must lie in [0, 1]")
    n = sigma.shape[0]
    positive = sigma > 0.0
    terms = np.zeros_like(sigma)
    terms[positive] = -sigma[positive] * np.log(sigma[positive])
    value = float(terms.mean())
    grads = np.zeros_like(sigma)
    grads[positive] = -(1.0 + np.log(sigma[positive])) / n
    return value, grads


def size_loss(s1_values, cap):
    """Mean hinge on S1 - cap; gradient 1/n strictly above the kink."""
    s1 = np.asarray(s1_values, dtype=float).reshape(-1)
    if np.any(s1 <= 0.0):
        raise ConfigError("scalings must be positive")
    n = s1.shape[0]
    active = s1 > cap
    value = float(np.where(active, s1 - cap, 0.0).mean())
    grads = np.zeros_like(s1)
    grads[active] = 1.0 / n
    return value, grads


def weighted_total(anisotropy_value, entropy_value, size_value, params):
    """Weighted combination of precomputed loss values."""
    return (
        params.weight_anisotropy * anisotropy_value
        + params.weight_entropy * entropy_value
        + params.weight_size * size_value
    )


def total_regularizer(scalings, opacities, params):
    """Weighted sum of the three losses evaluated on raw inputs."""
    s = np.asarray(scalings, dtype=float)
    aniso, _ = anisotropy_loss(s[:, :2], params.anisotropy_cap)
    entropy, _ = entropy_loss(opacities)
    size, _ = size_loss(s[:, 0], params.size_cap)
    return weighted_total(aniso, entropy, size, params)
