import math

import numpy as np
import pytest

from aerosplat import losses
from aerosplat.losses import LossParams


def central_difference(func, x, h=1e-6):
    """Independent gradient oracle via central finite differences."""
    x = np.asarray(x, dtype=float)
    grad = np.zeros_like(x)
    flat = x.reshape(-1)
    out = grad.reshape(-1)
    for i in range(flat.shape[0]):
        bumped = flat.copy()
        bumped[i] += h
        up = func(bumped.reshape(x.shape))
        bumped[i] -= 2.0 * h
        down = func(bumped.reshape(x.shape))
        out[i] = (up - down) / (2.0 * h)
    return grad


class TestAnisotropyLoss:
    def test_inside_hinge_is_zero(self):
        value, grads = losses.anisotropy_loss([[1.05, 1.0]], 1.1)
        assert value == 0.0
        assert np.abs(grads).max() == 0.0

    def test_hand_value(self):
        value, _ = losses.anisotropy_loss([[1.5, 1.0]], 1.1)
        assert value == pytest.approx(0.4, abs=1e-12)

    def test_gradient_against_finite_differences(self):
        rng = np.random.default_rng(3)
        cap = 1.1
        for _ in range(100):
            s2 = rng.uniform(0.5, 2.0, 8)
            ratio = np.concatenate(
                [rng.uniform(1.0, 1.08, 4), rng.uniform(1.15, 2.0, 4)]
            )  # away from the kink at 1.1 on both sides
            s = np.stack([ratio * s2, s2], axis=1)
            _, grads = losses.anisotropy_loss(s, cap)
            fd = central_difference(lambda v: losses.anisotropy_loss(v, cap)[0], s)
            scale = max(np.abs(fd).max(), 1e-9)
            assert np.abs(grads - fd).max() / scale < 1e-6

    def test_invalid_ordering(self):
        with pytest.raises(Exception):
            losses.anisotropy_loss([[1.0, 2.0]], 1.1)


class TestEntropyLoss:
    def test_binary_opacities_are_zero(self):
        value, _ = losses.entropy_loss([0.0, 1.0, 1.0, 0.0])
        assert value == 0.0

    def test_hand_value(self):
        value, _ = losses.entropy_loss([0.5])
        assert value == pytest.approx(0.5 * math.log(2.0), abs=1e-12)

    def test_maximum_at_inverse_e(self):
        # Calculus oracle: d/ds (-s ln s) = -(1 + ln s) vanishes at 1/e.
        _, grads = losses.entropy_loss([1.0 / math.e])
        assert abs(grads[0]) < 1e-12
        peak, _ = losses.entropy_loss([1.0 / math.e])
        for s in (1.0 / math.e - 0.05, 1.0 / math.e + 0.05):
            value, _ = losses.entropy_loss([s])
            assert value < peak

    def test_gradient_against_finite_differences(self):
        rng = np.random.default_rng(5)
        for _ in range(100):
            sigma = rng.uniform(0.05, 0.95, 12)
            _, grads = losses.entropy_loss(sigma)
            fd = central_difference(lambda v: losses.entropy_loss(v)[0], sigma)
            assert np.abs(grads - fd).max() / np.abs(fd).max() < 1e-6


class TestSizeLoss:
    def test_at_kink_is_zero(self):
        value, grads = losses.size_loss([0.008], 0.008)
        assert value == 0.0
        assert grads[0] == 0.0

    def test_hand_value(self):
        value, _ = losses.size_loss([0.01], 0.008)
        assert value == pytest.approx(0.002, abs=1e-12)

    def test_linear_region_gradient(self):
        _, grads = losses.size_loss([0.02, 0.005, 0.03, 0.001], 0.008)
        assert grads[0] == pytest.approx(0.25, abs=1e-15)
        assert grads[1] == 0.0
        assert grads[2] == pytest.approx(0.25, abs=1e-15)

    def test_gradient_against_finite_differences(self):
        rng = np.random.default_rng(7)
        for _ in range(100):
            s1 = np.concatenate(
                [rng.uniform(0.001, 0.007, 5), rng.uniform(0.009, 0.05, 5)]
            )
            _, grads = losses.size_loss(s1, 0.008)
            fd = central_difference(lambda v: losses.size_loss(v, 0.008)[0], s1)
            assert np.abs(grads - fd).max() / np.abs(fd).max() < 1e-6


class TestTotalRegularizer:
    def test_weighted_hand_value(self):
        total = losses.weighted_total(0.4, 0.5 * math.log(2.0), 0.002, LossParams())
        expected = 10.0 * 0.4 + 0.01 * 0.5 * math.log(2.0) + 0.01 * 0.002
        assert total == pytest.approx(expected, abs=1e-12)
        assert total == pytest.approx(4.00349, abs=1e-4)

    def test_zero_losses(self):
        assert losses.weighted_total(0.0, 0.0, 0.0, LossParams()) == 0.0

    def test_zero_weights(self):
        params = LossParams(weight_anisotropy=0.0, weight_entropy=0.0, weight_size=0.0)
        assert losses.weighted_total(5.0, 3.0, 1.0, params) == 0.0

    def test_matches_component_losses(self):
        rng = np.random.default_rng(11)
        s2 = rng.uniform(0.001, 0.01, 20)
        s1 = s2 * rng.uniform(1.0, 2.0, 20)
        scalings = np.stack([s1, s2], axis=1)
        opacities = rng.uniform(0.0, 1.0, 20)
        params = LossParams()
        aniso, _ = losses.anisotropy_loss(scalings, params.anisotropy_cap)
        entropy, _ = losses.entropy_loss(opacities)
        size, _ = losses.size_loss(s1, params.size_cap)
        expected = losses.weighted_total(aniso, entropy, size, params)
        total = losses.total_regularizer(scalings, opacities, params)
        assert total == pytest.approx(expected, rel=1e-14)

    def test_nonnegative_and_zero_on_feasible_set(self):
        params = LossParams()
        scalings = np.array([[0.005, 0.005], [0.0079, 0.0075]])
        opacities = np.array([0.0, 1.0])
        assert losses.total_regularizer(scalings, opacities, params) == 0.0
        rng = np.random.default_rng(13)
        for _ in range(50):
            s2 = rng.uniform(0.001, 0.02, 10)
            s1 = s2 * rng.uniform(1.0, 3.0, 10)
            value = losses.total_regularizer(
                np.stack([s1, s2], axis=1), rng.uniform(0.0, 1.0, 10), params
            )
            assert value >= 0.0
