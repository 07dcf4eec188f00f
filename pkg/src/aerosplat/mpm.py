"""Explicit MPM solver: particle-grid transfers with affine momentum.

One substep is: zero grid accumulators, scatter particle mass/momentum and
internal stress forces (P2G), inject external per-particle forces through
the same B-spline weights, integrate nodal velocities with gravity and
boundary conditions, then gather back to particles (G2P) updating position,
affine matrix and deformation gradient, with the plastic return map applied
to the trial gradient.  Quadratic B-spline kernels (3x3x3 stencil)
throughout; symplectic Euler in time.

Grid work is restricted each substep to the bounding box of the particles
plus a stencil pad, so large mostly-empty grids cost nothing.
"""

from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from . import materials
from .errors import BlowUpError, ConfigError, OutOfDomainError

# Nodes with less mass than this are treated as empty during the grid update.
NODE_MASS_FLOOR = 1e-12

# Default particle-speed ceiling; exceeding it aborts the run (CFL violation).
SPEED_CEILING = 1e3


@dataclass
class Particles:
    """Structure-of-arrays particle state.

    x: positions (n, 3) m       v: velocities (n, 3) m/s
    mass: (n,) kg               volume0: rest volumes (n,) m^3
    F: elastic deformation gradients (n, 3, 3)
    C: affine momentum matrices (n, 3, 3) 1/s
    is_surface / is_pinned: (n,) bool flags
    patch_index: (n,) int64 link into the patch set, -1 when absent
    """

    x: np.ndarray
    v: np.ndarray
    mass: np.ndarray
    volume0: np.ndarray
    F: np.ndarray
    C: np.ndarray
    is_surface: np.ndarray
    is_pinned: np.ndarray
    patch_index: np.ndarray

    @classmethod
    def allocate(cls, n):
        return cls(
            x=np.zeros((n, 3)),
            v=np.zeros((n, 3)),
            mass=np.ones(n),
            volume0=np.ones(n),
            F=np.tile(np.eye(3), (n, 1, 1)),
            C=np.zeros((n, 3, 3)),
            is_surface=np.zeros(n, dtype=bool),
            is_pinned=np.zeros(n, dtype=bool),
            patch_index=np.full(n, -1, dtype=np.int64),
        )

    def __len__(self):
        return self.x.shape[0]

    def total_momentum(self):
        return (self.mass[:, None] * self.v).sum(axis=0)


@dataclass
class Grid:
    """Eulerian background grid with accumulators and boundary tags.

    Boundary handling: nodes within ``boundary_margin`` cells of a domain
    face are sticky along that face's axis (the normal velocity component
    is zeroed); nodes marked pinned get zero velocity outright.
    """

    dims: tuple
    dx: float
    origin: np.ndarray
    mass: np.ndarray = field(repr=False, default=None)
    momentum: np.ndarray = field(repr=False, default=None)
    velocity: np.ndarray = field(repr=False, default=None)
    force: np.ndarray = field(repr=False, default=None)
    pinned: np.ndarray = field(repr=False, default=None)
    sticky_axes: np.ndarray = field(repr=False, default=None)
    boundary_margin: int = 2

    def __post_init__(self):
        nx, ny, nz = self.dims
        if min(nx, ny, nz) < 4:
            raise ConfigError("grid needs at least 4 nodes per axis")
        self.origin = np.asarray(self.origin, dtype=float)
        if self.mass is None:
            self.mass = np.zeros((nx, ny, nz))
            self.momentum = np.zeros((nx, ny, nz, 3))
            self.velocity = np.zeros((nx, ny, nz, 3))
            self.force = np.zeros((nx, ny, nz, 3))
            self.pinned = np.zeros((nx, ny, nz), dtype=bool)
            # sticky_axes[i, j, k, a] means zero the a component at that node.
            self.sticky_axes = np.zeros((nx, ny, nz, 3), dtype=bool)
            m = self.boundary_margin
            for axis in range(3):
                idx = [slice(None)] * 3 + [axis]
                idx[axis] = slice(0, m)
                self.sticky_axes[tuple(idx)] = True
                idx[axis] = slice(self.dims[axis] - m, self.dims[axis])
                self.sticky_axes[tuple(idx)] = True

    @classmethod
    def from_bounds(cls, lower, upper, dx, margin_cells=4, boundary_margin=2):
        """Grid covering [lower, upper] plus a margin of whole cells."""
        lower = np.asarray(lower, dtype=float)
        upper = np.asarray(upper, dtype=float)
        if np.any(upper < lower):
            raise ConfigError("bounds upper < lower")
        dims = tuple(
            int(np.ceil((upper[a] - lower[a]) / dx)) + 2 * margin_cells + 1
            for a in range(3)
        )
        origin = lower - margin_cells * dx
        return cls(dims=dims, dx=dx, origin=origin, boundary_margin=boundary_margin)

    def node_position(self, index):
        return self.origin + np.asarray(index, dtype=float) * self.dx

    def pin_nodes_near(self, anchors, radius):
        """Tag every node within ``radius`` of any anchor point as pinned."""
        anchors = np.atleast_2d(np.asarray(anchors, dtype=float))
        for anchor in anchors:
            lo = np.floor((anchor - radius - self.origin) / self.dx).astype(int)
            hi = np.ceil((anchor + radius - self.origin) / self.dx).astype(int)
            lo = np.maximum(lo, 0)
            hi = np.minimum(hi, np.array(self.dims) - 1)
            if np.any(hi < lo):
                continue
            ii, jj, kk = np.meshgrid(
                np.arange(lo[0], hi[0] + 1),
                np.arange(lo[1], hi[1] + 1),
                np.arange(lo[2], hi[2] + 1),
                indexing="ij",
            )
            pos = self.origin + np.stack([ii, jj, kk], axis=-1) * self.dx
            near = np.linalg.norm(pos - anchor, axis=-1) <= radius
            self.pinned[lo[0] : hi[0] + 1, lo[1] : hi[1] + 1, lo[2] : hi[2] + 1] |= near

    def active_box(self, x, pad=3):
        """Node-index box covering all stencils of particles at ``x``."""
        lo = np.floor((x.min(axis=0) - self.origin) / self.dx).astype(int) - pad
        hi = np.ceil((x.max(axis=0) - self.origin) / self.dx).astype(int) + pad
        lo = np.maximum(lo, 0)
        hi = np.minimum(hi, np.array(self.dims) - 1)
        return tuple(slice(lo[a], hi[a] + 1) for a in range(3))

    def zero_accumulators(self, box=None):
        if box is None:
            box = (slice(None),) * 3
        self.mass[box] = 0.0
        self.momentum[box] = 0.0
        self.velocity[box] = 0.0
        self.force[box] = 0.0


@dataclass
class StepConfig:
    """Substep and frame cadence.

    ``substeps_per_frame * dt`` must reproduce ``frame_dt`` to 1e-9.
    """

    dt: float = 2e-4
    frame_dt: float = 0.04
    gravity: np.ndarray = None
    substeps_per_frame: int = 0
    speed_ceiling: float = SPEED_CEILING

    def __post_init__(self):
        if self.gravity is None:
            self.gravity = np.array([0.0, -9.8, 0.0])
        self.gravity = np.asarray(self.gravity, dtype=float)
        if self.dt <= 0.0:
            raise ConfigError("dt must be positive")
        if self.substeps_per_frame == 0:
            self.substeps_per_frame = int(round(self.frame_dt / self.dt))
        if self.substeps_per_frame < 1:
            raise ConfigError("need at least one substep per frame")
        if abs(self.substeps_per_frame * self.dt - self.frame_dt) > 1e-9:
            raise ConfigError(
                f"substeps ({self.substeps_per_frame}) x dt ({self.dt}) "
                f"does not match frame_dt ({self.frame_dt})"
            )


@dataclass
class FrameDiagnostics:
    """Per-frame solver summary."""

    max_speed: float
    total_momentum: np.ndarray
    particle_count: int
    substeps: int


def bspline_weights(xp, grid):
    """Quadratic B-spline stencil for one particle position.

    Returns (nodes, weights, gradients): node indices (27, 3), weights (27,)
    summing to one, and physical-space weight gradients (27, 3) summing to
    zero.  Raises OutOfDomainError when the stencil leaves the grid.
    """
    xp = np.asarray(xp, dtype=float)
    u = (xp - grid.origin) / grid.dx
    base = np.floor(u - 0.5).astype(np.int64)
    if np.any(base < 0) or np.any(base + 2 > np.array(grid.dims) - 1):
        raise OutOfDomainError(f"stencil for position {xp} leaves the grid")
    fx = u - base
    w = np.stack(
        [0.5 * (1.5 - fx) ** 2, 0.75 - (fx - 1.0) ** 2, 0.5 * (fx - 0.5) ** 2],
        axis=1,
    )  # (axis, offset) after transpose below
    dw = np.stack([fx - 1.5, -2.0 * (fx - 1.0), fx - 0.5], axis=1) / grid.dx
    nodes = np.empty((27, 3), dtype=np.int64)
    weights = np.empty(27)
    grads = np.empty((27, 3))
    idx = 0
    for i in range(3):
        for j in range(3):
            for k in range(3):
                nodes[idx] = base + (i, j, k)
                weights[idx] = w[0, i] * w[1, j] * w[2, k]
                grads[idx] = (
                    dw[0, i] * w[1, j] * w[2, k],
                    w[0, i] * dw[1, j] * w[2, k],
                    w[0, i] * w[1, j] * dw[2, k],
                )
                idx += 1
    return nodes, weights, grads


def check_in_domain(x, grid):
    """Verify every particle's stencil fits inside the grid."""
    u = (np.asarray(x) - grid.origin) / grid.dx
    base = np.floor(u - 0.5)
    bad = np.any(base < 0, axis=1) | np.any(
        base + 2 > np.array(grid.dims) - 1, axis=1
    )
    if np.any(bad):
        p = int(np.argmax(bad))
        raise OutOfDomainError(
            f"particle {p} at {np.asarray(x)[p]} has a stencil outside the grid"
        )


def _p2g_unchecked(particles, grid, stresses):
    _kernels.p2g_scatter(
        particles.x,
        particles.v,
        particles.mass,
        particles.volume0,
        particles.C,
        np.ascontiguousarray(stresses),
        grid.origin,
        grid.dx,
        grid.mass,
        grid.momentum,
        grid.force,
    )


def p2g(particles, grid, stresses):
    """Scatter mass, APIC momentum and stress forces onto zeroed accumulators."""
    check_in_domain(particles.x, grid)
    _p2g_unchecked(particles, grid, stresses)


def _inject_unchecked(particles, grid, forces):
    _kernels.scatter_forces(
        particles.x,
        np.ascontiguousarray(forces, dtype=float),
        grid.origin,
        grid.dx,
        grid.force,
    )


def inject_external_forces(particles, grid, forces):
    """Scatter per-particle external forces through the B-spline weights."""
    check_in_domain(particles.x, grid)
    _inject_unchecked(particles, grid, forces)


def grid_update(grid, step, box=None):
    """Integrate nodal velocities: momentum, forces, gravity, boundaries."""
    if box is None:
        box = tuple(slice(0, d) for d in grid.dims)
    lo = np.array([s.start if s.start is not None else 0 for s in box], dtype=np.int64)
    hi = np.array(
        [s.stop if s.stop is not None else grid.dims[a] for a, s in enumerate(box)],
        dtype=np.int64,
    )
    _kernels.grid_update(
        grid.mass,
        grid.momentum,
        grid.force,
        grid.sticky_axes.view(np.uint8),
        grid.pinned.view(np.uint8),
        grid.velocity,
        step.dt,
        step.gravity,
        lo,
        hi,
        NODE_MASS_FLOOR,
    )


def _g2p_unchecked(particles, grid, step, material):
    max_speed = _kernels.g2p_gather(
        particles.x,
        particles.v,
        particles.C,
        particles.F,
        particles.is_pinned.astype(np.uint8),
        grid.velocity,
        grid.origin,
        grid.dx,
        step.dt,
    )
    particles.F[:] = materials.apply_plasticity_batch(particles.F, material)
    if not np.isfinite(max_speed) or max_speed > step.speed_ceiling:
        raise BlowUpError(
            f"particle speed {max_speed:.3g} m/s exceeds ceiling "
            f"{step.speed_ceiling:.3g} m/s"
        )
    return max_speed


def g2p(particles, grid, step, material):
    """Gather grid velocities; advect particles and update C and F.

    Applies the material's plastic return map to the trial deformation
    gradient and enforces the particle-speed ceiling.
    """
    check_in_domain(particles.x, grid)
    return _g2p_unchecked(particles, grid, step, material)


def step_frame(particles, grid, material, step, external_forces=None):
    """Advance the scene by one frame (``substeps_per_frame`` substeps).

    ``external_forces`` is an optional (n, 3) array of per-particle forces
    held constant over the frame and injected into the grid each substep.
    """
    max_speed = 0.0
    for _ in range(step.substeps_per_frame):
        # Positions only move in G2P, so one domain check covers the
        # scatter, inject, and gather of this substep.
        check_in_domain(particles.x, grid)
        box = grid.active_box(particles.x)
        grid.zero_accumulators(box)
        stresses = materials.kirchhoff_stress_batch(particles.F, material)
        _p2g_unchecked(particles, grid, stresses)
        if external_forces is not None:
            _inject_unchecked(particles, grid, external_forces)
        grid_update(grid, step, box)
        max_speed = max(max_speed, _g2p_unchecked(particles, grid, step, material))
    return FrameDiagnostics(
        max_speed=max_speed,
        total_momentum=particles.total_momentum(),
        particle_count=len(particles),
        substeps=step.substeps_per_frame,
    )


PARTICLE_DUMP_HEADER = "# particle dump: x y z vx vy vz (SI units, one particle per line)"


def write_particle_dump(path, particles):
    """Plain-text particle table consumed by the metrics tooling."""
    rows = np.hstack([particles.x, particles.v])
    with open(path, "w") as fh:
        fh.write(PARTICLE_DUMP_HEADER + "\n")
        for row in rows:
            fh.write(" ".join(f"{value:.17g}" for value in row) + "\n")


def read_particle_dump(path):
    """Read a particle dump; returns (positions (n, 3), velocities (n, 3))."""
    data = np.loadtxt(path, comments="#", ndmin=2)
    if data.shape[1] < 6:
        raise ValueError(f"{path}: expected 6 columns, got {data.shape[1]}")
    return data[:, :3].copy(), data[:, 3:6].copy()
