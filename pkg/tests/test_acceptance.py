"""Acceptance suite: one test per release criterion, at stated tolerances.

Run with ``pytest tests/test_acceptance.py -v -s`` to see one pass line per
criterion.  Criterion 9 simulates the full 250-frame desk-scale flag run
and takes a few minutes.
"""

import math
import time

import numpy as np
import pytest
from _helpers import random_deformation, random_rotation

from aerosplat import (
    losses,
    materials,
    metrics,
    mpm,
    ppm,
    render,
    scene,
    surface,
    wind,
)
from aerosplat.losses import LossParams
from aerosplat.materials import LameParams
from aerosplat.mpm import Grid, Particles, StepConfig
from aerosplat.wind import AeroCoefficients, FlowField


def _report(number, name):
    print(f"[acceptance] criterion {number:02d} ({name}): PASS")


class TestCriterion01Conservation:
    def test_p2g_conserves_mass_and_momentum(self):
        rng = np.random.default_rng(2024)
        start = time.time()
        for _ in range(1000):
            n = int(rng.integers(1, 12))
            p = Particles.allocate(n)
            p.x = rng.uniform(0.5, 1.0, (n, 3))
            p.v = rng.normal(0.0, 1.0, (n, 3))
            p.mass = rng.uniform(0.5, 2.0, n)
            p.C = rng.normal(0.0, 1.0, (n, 3, 3))  # nonzero affine term
            grid = Grid(dims=(16, 16, 16), dx=0.1, origin=np.zeros(3))
            mpm.p2g(p, grid, np.zeros((n, 3, 3)))
            total_mass = p.mass.sum()
            assert abs(grid.mass.sum() - total_mass) / total_mass < 1e-14
            momentum = (p.mass[:, None] * p.v).sum(axis=0)
            scattered = grid.momentum.sum(axis=(0, 1, 2))
            scale = max(np.abs(momentum).max(), 1.0)
            assert np.abs(scattered - momentum).max() / scale < 1e-12
        elapsed = time.time() - start
        assert elapsed < 5.0, f"conservation sweep took {elapsed:.2f} s (budget 5 s)"
        _report(1, "transfer conservation")


class TestCriterion02Ballistics:
    def test_free_fall_matches_closed_form(self):
        mat = materials.MaterialParams()
        step = StepConfig(dt=1e-3, frame_dt=1.0, gravity=np.array([0.0, -9.8, 0.0]))
        grid = Grid(dims=(16, 80, 16), dx=0.1, origin=np.array([0.0, -6.5, 0.0]))
        p = Particles.allocate(1)
        p.x[0] = [0.8, 0.0, 0.8]
        p.volume0[0] = 1e-6
        mpm.step_frame(p, grid, mat, step)
        drop = -p.x[0, 1]
        assert abs(drop - 4.9) / 4.9 < 0.01, f"drop {drop:.4f} m vs 4.9 m analytic"
        _report(2, "ballistic free fall")


class TestCriterion03Constitutive:
    def test_stress_and_return_map_properties(self):
        lame = LameParams(3.0, 1.5)
        tau_rest = materials.fixed_corotated_kirchhoff(np.eye(3), lame)
        assert np.abs(tau_rest).max() < 1e-14

        rng = np.random.default_rng(31)
        for _ in range(100):
            f = random_deformation(rng)
            q = random_rotation(rng)
            tau = materials.fixed_corotated_kirchhoff(f, lame)
            tau_rot = materials.fixed_corotated_kirchhoff(q @ f, lame)
            scale = max(np.abs(tau).max(), 1e-12)
            assert np.abs(tau_rot - q @ tau @ q.T).max() / scale < 1e-8

        alpha = materials.drucker_prager_alpha(30.0)
        for _ in range(100):
            f = random_deformation(rng)
            once = materials.drucker_prager_return_map(f, lame, alpha)
            twice = materials.drucker_prager_return_map(once, lame, alpha)
            assert np.abs(twice - once).max() < 1e-10

        expanded = materials.drucker_prager_return_map(
            np.diag([1.2, 1.1, 1.05]), lame, alpha
        )
        assert np.allclose(expanded, np.eye(3), atol=1e-12)
        _report(3, "constitutive models")


class TestCriterion04SurfaceTransport:
    def test_normals_shear_and_area(self):
        rng = np.random.default_rng(41)
        for _ in range(200):
            f = random_deformation(rng)
            rot = random_rotation(rng)
            s = np.array([0.03, 0.02, 0.004])
            cov_rest = rot @ np.diag(s**2) @ rot.T
            _, _, n = surface.transport_patch(
                cov_rest, surface.rest_normal(rot, s), f, np.zeros(3)
            )
            assert abs(np.linalg.norm(n) - 1.0) < 1e-10

        shear = np.eye(3)
        shear[0, 1] = 1.0
        _, _, n = surface.transport_patch(
            np.eye(3) * 1e-4, [1.0, 0.0, 0.0], shear, np.zeros(3)
        )
        expected = np.array([1.0, -1.0, 0.0]) / math.sqrt(2.0)
        assert np.abs(n - expected).max() < 1e-12

        assert surface.patch_area([0.02, 0.01, 0.001]) == math.pi * 0.02 * 0.01
        _report(4, "surface transport")


class TestCriterion05Aerodynamics:
    def test_force_model_and_grid_coupling(self):
        headwind = wind.patch_force(
            [1.0, 0.0, 0.0], 1.0, np.zeros(3), [2.0, 0.0, 0.0], 1.0,
            AeroCoefficients(drag=0.5),
        )
        assert abs(np.linalg.norm(headwind) - 1.0) < 1e-12
        assert np.abs(headwind - [1.0, 0.0, 0.0]).max() < 1e-12

        comoving = wind.patch_force(
            [0.0, 0.0, 1.0], 1.0, [3.0, 1.0, 0.0], [3.0, 1.0, 0.0], 1.2,
            AeroCoefficients(0.5, 0.4, 0.1),
        )
        assert np.array_equal(comoving, np.zeros(3))

        mat = materials.MaterialParams(
            model=materials.DRUCKER_PRAGER, young_modulus=5e5,
            poisson_ratio=0.3, density=200.0,
        )
        patches, particles = scene.build_sand_block((4, 4, 4), 0.05, mat)
        grid = Grid.from_bounds(particles.x.min(axis=0), particles.x.max(axis=0), 0.05)
        flow = FlowField(base_velocity=[5.0, 0.0, 0.0], gaussian_sigma=0.0, uniform_delta=0.0)
        world = surface.transport_all(patches, particles.x, particles.F)
        forces = wind.apply_aero_to_grid(
            world, patches, particles, grid, flow, AeroCoefficients(0.4, 0.3, 0.01),
            t=0.0, rng=flow.make_rng(),
        )
        scattered = grid.force.sum(axis=(0, 1, 2))
        total = forces.sum(axis=0)
        assert np.abs(scattered - total).max() / np.abs(total).max() < 1e-12
        _report(5, "aerodynamic force model")


class TestCriterion06FlowStatistics:
    def test_monte_carlo_mean(self):
        flow = FlowField(
            base_velocity=[2.0, 0.5, -1.0],
            sine_amplitude=[1.0, 0.0, 0.0],
            sine_frequency=1.3,
            gaussian_sigma=0.3,
            uniform_delta=0.0,
            seed=77,
        )
        rng = flow.make_rng()
        t = 0.7
        n = 100_000
        samples = np.stack([wind.sample_flow(flow, t, rng) for _ in range(n)])
        expected = flow.base_velocity + flow.sine_amplitude * math.sin(1.3 * t)
        tol = 3.0 * flow.gaussian_sigma / math.sqrt(n)
        error = np.abs(samples.mean(axis=0) - expected).max()
        assert error < tol, f"MC mean error {error:.2e} exceeds 3 sigma/sqrt(n) = {tol:.2e}"
        _report(6, "flow statistics")


class TestCriterion07Losses:
    def _central_difference(self, func, x, h=1e-6):
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

    def test_gradients_and_worked_values(self):
        rng = np.random.default_rng(99)
        checked = 0
        while checked < 100:
            s2 = rng.uniform(0.5, 2.0, 4)
            ratio = np.concatenate([rng.uniform(1.0, 1.08, 2), rng.uniform(1.15, 2.0, 2)])
            s = np.stack([ratio * s2, s2], axis=1)
            _, grads = losses.anisotropy_loss(s, 1.1)
            fd = self._central_difference(lambda v: losses.anisotropy_loss(v, 1.1)[0], s)
            assert np.abs(grads - fd).max() / max(np.abs(fd).max(), 1e-9) < 1e-5

            sigma = rng.uniform(0.05, 0.95, 4)
            _, grads = losses.entropy_loss(sigma)
            fd = self._central_difference(lambda v: losses.entropy_loss(v)[0], sigma)
            assert np.abs(grads - fd).max() / np.abs(fd).max() < 1e-5

            s1 = np.concatenate([rng.uniform(0.001, 0.007, 2), rng.uniform(0.009, 0.05, 2)])
            _, grads = losses.size_loss(s1, 0.008)
            fd = self._central_difference(lambda v: losses.size_loss(v, 0.008)[0], s1)
            assert np.abs(grads - fd).max() / np.abs(fd).max() < 1e-5
            checked += 4

        value, _ = losses.anisotropy_loss([[1.5, 1.0]], 1.1)
        assert abs(value - 0.4) < 1e-12
        value, _ = losses.entropy_loss([0.5])
        assert abs(value - 0.5 * math.log(2.0)) < 1e-12
        value, _ = losses.size_loss([0.01], 0.008)
        assert abs(value - 0.002) < 1e-12
        _report(7, "regularization losses")


class TestCriterion08Rendering:
    def test_composite_contract(self):
        means = np.array([[4.5, 4.5], [4.5, 4.5]])
        covs = np.tile(np.eye(2) * 2.0, (2, 1, 1))
        colors = np.array([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]])
        img = render.composite(
            means, covs, colors, np.array([0.5, 0.5]), np.array([1.0, 2.0]), 9, 9
        )
        assert np.abs(img[4, 4] - [0.5, 0.25, 0.0]).max() < 1e-12

        rng = np.random.default_rng(111)
        n = 20
        means = rng.uniform(0.0, 16.0, (n, 2))
        covs = np.tile(np.eye(2), (n, 1, 1)) * rng.uniform(0.5, 3.0, (n, 1, 1))
        colors = rng.uniform(0.0, 1.0, (n, 3))
        opacities = rng.uniform(0.1, 1.0, n)
        depth = rng.uniform(1.0, 9.0, n)
        base = render.composite(means, covs, colors, opacities, depth, 16, 16)
        perm = rng.permutation(n)
        shuffled = render.composite(
            means[perm], covs[perm], colors[perm], opacities[perm], depth[perm], 16, 16
        )
        assert np.array_equal(base, shuffled)

        transparent = render.composite(
            means, covs, colors, np.zeros(n), depth, 16, 16
        )
        assert np.abs(transparent).max() == 0.0
        _report(8, "splat rendering")


class TestCriterion09EndToEndFlag:
    def test_pattern2_desk_scale(self, tmp_path):
        cfg = scene.load_preset("flag-pattern-2")
        assert (cfg.nx, cfg.ny) == (20, 30)
        assert cfg.grid_dims == (64, 64, 64)
        cfg.frames = 250
        cfg.out_dir = str(tmp_path / "pattern2")
        cfg.dump_particles = True
        cfg.camera.width = 320
        cfg.camera.height = 180

        built = scene.build_scene(cfg)
        x0 = built.particles.x.copy()
        pinned = built.particles.is_pinned.copy()
        assert pinned.sum() == 3

        start = time.time()
        summary = scene.run_simulation(cfg, quiet=True)
        elapsed = time.time() - start
        assert elapsed <= 600.0, f"run took {elapsed:.0f} s (budget 600 s)"
        assert summary.frames_written == 250
        assert np.isfinite(summary.max_speed)

        x50, v50 = mpm.read_particle_dump(tmp_path / "pattern2" / "particles_0050.txt")
        assert np.isfinite(x50).all() and np.isfinite(v50).all()
        mean_dx = (x50[:, 0] - x0[:, 0]).mean()
        assert mean_dx > 0.0, f"mean +x displacement after 50 frames was {mean_dx:.2e}"
        assert np.abs(x50[pinned] - x0[pinned]).max() < 1e-9

        x_final, v_final = mpm.read_particle_dump(
            tmp_path / "pattern2" / "particles_0249.txt"
        )
        assert np.isfinite(x_final).all() and np.isfinite(v_final).all()
        assert np.abs(x_final[pinned] - x0[pinned]).max() < 1e-9
        print(
            f"[acceptance] criterion 09 detail: {elapsed:.0f} s, "
            f"mean dx(50) = {mean_dx:.3f} m, max speed {summary.max_speed:.2f} m/s"
        )
        _report(9, "end-to-end flag run")


class TestCriterion10SurfaceOnlyAblation:
    def test_interior_force_free(self):
        mat = materials.MaterialParams(
            model=materials.DRUCKER_PRAGER, young_modulus=5e5,
            poisson_ratio=0.3, density=200.0,
        )
        patches, particles = scene.build_sand_block((4, 4, 4), 0.05, mat)
        flow = FlowField(base_velocity=[5.0, 0.0, 0.0], gaussian_sigma=0.0, uniform_delta=0.0)
        coeffs = AeroCoefficients(0.4, 0.3, 0.01)
        world = surface.transport_all(patches, particles.x, particles.F)
        v_flow = wind.sample_flow(flow, 0.0, flow.make_rng())
        surface_only = wind.aero_particle_forces(
            world, patches, particles, v_flow, flow, coeffs, surface_only=True
        )
        everywhere = wind.aero_particle_forces(
            world, patches, particles, v_flow, flow, coeffs, surface_only=False
        )
        interior = ~particles.is_surface
        assert interior.sum() == 8
        assert np.abs(surface_only[interior]).max() == 0.0
        assert np.abs(everywhere[interior]).max() > 0.0
        _report(10, "surface-only force recipients")


class TestCriterion11Metrics:
    def test_psnr_and_chamfer_contracts(self):
        img = np.random.default_rng(5).uniform(0.0, 1.0, (12, 12, 3))
        assert metrics.psnr(img, img.copy()) == math.inf

        ref = np.full((16, 16, 3), 0.4)
        assert abs(metrics.psnr(ref + 0.1, ref) - 20.0) < 1e-9

        assert metrics.chamfer([[0.0, 0.0, 0.0]], [[1.0, 0.0, 0.0]]) == 2.0

        rng = np.random.default_rng(7)
        base = rng.uniform(0.2, 0.8, (24, 24, 3))
        values = []
        for amplitude in (0.01, 0.05, 0.1):
            noise = np.random.default_rng(11).uniform(-amplitude, amplitude, base.shape)
            values.append(metrics.psnr(base + noise, base))
        assert values[0] > values[1] > values[2]
        _report(11, "evaluation metrics")


class TestCriterion12Determinism:
    def test_byte_identical_reruns(self, tmp_path):
        def run(tag):
            cfg = scene.load_preset("flag-pattern-2")
            cfg.nx, cfg.ny = 10, 14
            cfg.frames = 6
            cfg.out_dir = str(tmp_path / tag)
            cfg.camera.width = 160
            cfg.camera.height = 90
            scene.run_simulation(cfg, quiet=True)
            return [
                (tmp_path / tag / f"frame_{k:04d}.ppm").read_bytes() for k in range(6)
            ]

        first = run("a")
        second = run("b")
        for k, (fa, fb) in enumerate(zip(first, second)):
            assert fa == fb, f"frame {k} differs between identical runs"
        _report(12, "seeded determinism")
