"""Benchmark the compiled kernel core against the numpy fallback.

Times the four hot paths on representative workloads: particle-to-grid
scatter, grid velocity update, grid-to-particle gather, and splat
compositing.  Usage:

    python3 benchmarks/bench_backends.py [--particles N] [--splats M] [--repeats K]
"""

import argparse
import time

import numpy as np

from aerosplat import _kernels, materials, mpm, render
from aerosplat.mpm import Grid, Particles, StepConfig


def build_workload(n_particles, seed=7):
    rng = np.random.default_rng(seed)
    grid = Grid(dims=(64, 64, 64), dx=0.05, origin=np.zeros(3))
    p = Particles.allocate(n_particles)
    p.x = rng.uniform(0.5, 2.5, (n_particles, 3))
    p.v = rng.normal(0.0, 0.5, (n_particles, 3))
    p.mass = rng.uniform(1e-4, 1e-3, n_particles)
    p.volume0 = rng.uniform(1e-6, 1e-5, n_particles)
    p.C = rng.normal(0.0, 0.1, (n_particles, 3, 3))
    lame = materials.LameParams(1e3, 1e3)
    stresses = materials.fixed_corotated_kirchhoff_batch(p.F, lame)
    step = StepConfig(dt=1e-4, frame_dt=1e-4)
    return grid, p, stresses, step


def build_splats(n_splats, width=640, height=360, seed=11):
    rng = np.random.default_rng(seed)
    means = rng.uniform(0.0, [width, height], (n_splats, 2))
    scales = rng.uniform(1.0, 6.0, n_splats)
    covs = np.einsum("n,ab->nab", scales, np.eye(2))
    colors = rng.uniform(0.0, 1.0, (n_splats, 3))
    opacities = rng.uniform(0.2, 0.9, n_splats)
    depth = rng.uniform(1.0, 10.0, n_splats)
    return means, covs, colors, opacities, depth, width, height


def time_call(func, repeats):
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        func()
        best = min(best, time.perf_counter() - start)
    return best


def run(backend, n_particles, n_splats, repeats):
    timings = {}
    with _kernels.use_backend(backend):
        grid, p, stresses, step = build_workload(n_particles)

        def do_p2g():
            grid.zero_accumulators()
            mpm.p2g(p, grid, stresses)

        timings["p2g"] = time_call(do_p2g, repeats)

        box = grid.active_box(p.x)
        timings["grid_update"] = time_call(lambda: mpm.grid_update(grid, step, box), repeats)

        x0, v0, c0, f0 = p.x.copy(), p.v.copy(), p.C.copy(), p.F.copy()

        def do_g2p():
            p.x[:], p.v[:], p.C[:], p.F[:] = x0, v0, c0, f0
            mpm.g2p(p, grid, step, materials.MaterialParams())

        timings["g2p"] = time_call(do_g2p, repeats)

        means, covs, colors, opacities, depth, width, height = build_splats(n_splats)
        timings["composite"] = time_call(
            lambda: render.composite(means, covs, colors, opacities, depth, width, height),
            repeats,
        )
    return timings


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--particles", type=int, default=20_000)
    parser.add_argument("--splats", type=int, default=5_000)
    parser.add_argument("--repeats", type=int, default=5)
    args = parser.parse_args()

    backends = _kernels.available()
    print(f"backends: {', '.join(backends)}  "
          f"(workload: {args.particles} particles, {args.splats} splats, best of {args.repeats})")
    results = {name: run(name, args.particles, args.splats, args.repeats) for name in backends}

    kernels = ["p2g", "grid_update", "g2p", "composite"]
    both = "cython" in results and "numpy" in results
    header = f"{'kernel':<12}" + "".join(f"{name:>12}" for name in backends)
    if both:
        header += f"{'speedup':>10}"
    print(header)
    for kernel in kernels:
        row = f"{kernel:<12}"
        for name in backends:
            row += f"{results[name][kernel] * 1e3:>10.2f}ms"
        if both:
            row += f"{results['numpy'][kernel] / results['cython'][kernel]:>9.1f}x"
        print(row)


if __name__ == "__main__":
    main()
