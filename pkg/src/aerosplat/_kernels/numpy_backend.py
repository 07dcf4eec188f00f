"""Pure numpy implementations of the hot loops.

Mirrors the compiled extension in aerosplat._kernels._core function for
function.  Callers must guarantee every particle stencil lies inside the
grid; these kernels do not bounds-check (the compiled twin cannot afford
to, and both sides must agree).

Particle-to-grid scatters use np.add.at so that accumulation handles
repeated node indices correctly; iteration is over the 27 stencil offsets
with all particles vectorized per offset.
"""

import math

import numpy as np


def _stencil(x, origin, dx):
    # Quadratic B-spline stencil setup shared by all transfer kernels.
    # Returns base node (n, 3) int64, per-axis weights (n, 3 axes, 3 offsets)
    # and per-axis derivative factors d(w)/dx (same shape).
    u = (x - origin) / dx
    base = np.floor(u - 0.5).astype(np.int64)
    fx = u - base
    w = np.empty(x.shape[:1] + (3, 3))
    w[:, :, 0] = 0.5 * (1.5 - fx) ** 2
    w[:, :, 1] = 0.75 - (fx - 1.0) ** 2
    w[:, :, 2] = 0.5 * (fx - 0.5) ** 2
    dw = np.empty_like(w)
    dw[:, :, 0] = (fx - 1.5) / dx
    dw[:, :, 1] = -2.0 * (fx - 1.0) / dx
    dw[:, :, 2] = (fx - 0.5) / dx
    return base, fx, w, dw


def p2g_scatter(x, v, mass, volume0, c_affine, stress, origin, dx, grid_mass, grid_mom, grid_force):
    """Scatter mass, APIC momentum and internal stress forces onto the grid."""
    base, fx, w, dw = _stencil(x, origin, dx)
    ny, nz = grid_mass.shape[1], grid_mass.shape[2]
    gm = grid_mass.reshape(-1)
    gmom = grid_mom.reshape(-1, 3)
    gforce = grid_force.reshape(-1, 3)
    mv = mass[:, None] * v
    for i in range(3):
        for j in range(3):
            for k in range(3):
                wijk = w[:, 0, i] * w[:, 1, j] * w[:, 2, k]
                dpos = (np.array([i, j, k], dtype=float) - fx) * dx
                gwx = dw[:, 0, i] * w[:, 1, j] * w[:, 2, k]
                gwy = w[:, 0, i] * dw[:, 1, j] * w[:, 2, k]
                gwz = w[:, 0, i] * w[:, 1, j] * dw[:, 2, k]
                flat = ((base[:, 0] + i) * ny + (base[:, 1] + j)) * nz + (base[:, 2] + k)
                np.add.at(gm, flat, wijk * mass)
                mom = wijk[:, None] * (mv + mass[:, None] * np.einsum("nab,nb->na", c_affine, dpos))
                np.add.at(gmom, flat, mom)
                grad = np.stack([gwx, gwy, gwz], axis=1)
                force = -np.einsum("nab,nb->na", stress, grad) * volume0[:, None]
                np.add.at(gforce, flat, force)


def scatter_forces(x, forces, origin, dx, grid_force):
    """Distribute per-particle external forces onto grid nodes by weight."""
    base, _, w, _ = _stencil(x, origin, dx)
    ny, nz = grid_force.shape[1], grid_force.shape[2]
    gforce = grid_force.reshape(-1, 3)
    for i in range(3):
        for j in range(3):
            for k in range(3):
                wijk = w[:, 0, i] * w[:, 1, j] * w[:, 2, k]
                flat = ((base[:, 0] + i) * ny + (base[:, 1] + j)) * nz + (base[:, 2] + k)
                np.add.at(gforce, flat, wijk[:, None] * forces)


def grid_update(mass, momentum, force, sticky, pinned, velocity, dt, gravity, lo, hi, mass_floor):
    """Nodal velocity update on the index box [lo, hi): momentum plus
    impulses over mass, gravity on massive nodes, boundary conditions."""
    box = tuple(slice(lo[a], hi[a]) for a in range(3))
    m = mass[box]
    massive = m > mass_floor
    inv_mass = np.where(massive, 1.0, 0.0) / np.where(massive, m, 1.0)
    vel = (momentum[box] + dt * force[box]) * inv_mass[..., None]
    vel[massive] += dt * np.asarray(gravity)
    vel[sticky[box].astype(bool)] = 0.0
    vel[pinned[box].astype(bool)] = 0.0
    velocity[box] = vel


def g2p_gather(x, v, c_affine, f_grad, is_pinned, grid_v, origin, dx, dt):
    """Gather velocities back to particles; advect and update C and F.

    Pinned particles keep zero velocity and fixed position but still update
    their affine matrix and deformation gradient from the local field.
    Returns the maximum particle speed after the update.
    """
    base, fx, w, dw = _stencil(x, origin, dx)
    ny, nz = grid_v.shape[1], grid_v.shape[2]
    gv = grid_v.reshape(-1, 3)
    n = x.shape[0]
    v_new = np.zeros((n, 3))
    c_new = np.zeros((n, 3, 3))
    grad_v = np.zeros((n, 3, 3))
    for i in range(3):
        for j in range(3):
            for k in range(3):
                wijk = w[:, 0, i] * w[:, 1, j] * w[:, 2, k]
                dpos = (np.array([i, j, k], dtype=float) - fx) * dx
                gwx = dw[:, 0, i] * w[:, 1, j] * w[:, 2, k]
                gwy = w[:, 0, i] * dw[:, 1, j] * w[:, 2, k]
                gwz = w[:, 0, i] * w[:, 1, j] * dw[:, 2, k]
                flat = ((base[:, 0] + i) * ny + (base[:, 1] + j)) * nz + (base[:, 2] + k)
                node_v = gv[flat]
                v_new += wijk[:, None] * node_v
                c_new += np.einsum("n,na,nb->nab", wijk, node_v, dpos)
                grad = np.stack([gwx, gwy, gwz], axis=1)
                grad_v += np.einsum("na,nb->nab", node_v, grad)
    pinned = is_pinned.astype(bool)
    v_new[pinned] = 0.0
    v[:] = v_new
    x += dt * v_new
    c_affine[:] = (4.0 / (dx * dx)) * c_new
    f_grad[:] = (np.eye(3) + dt * grad_v) @ f_grad
    speeds = np.linalg.norm(v_new, axis=1)
    return float(speeds.max()) if n else 0.0


def composite_splats(means, covs, colors, opacities, image, alpha_clamp, alpha_min, t_min):
    """Front-to-back alpha blend of depth-sorted splats into ``image``.

    Inputs must already be sorted front to back.  Footprints are truncated
    at the 3 sigma ellipse bounding box; pixels whose transmittance drops
    below ``t_min`` stop accumulating.
    """
    height, width = image.shape[:2]
    trans = np.ones((height, width))
    for s in range(means.shape[0]):
        a = covs[s, 0, 0]
        b = covs[s, 0, 1]
        c = covs[s, 1, 1]
        det = a * c - b * b
        if det <= 0.0:
            continue
        inv00 = c / det
        inv01 = -b / det
        inv11 = a / det
        lam_max = 0.5 * (a + c) + math.sqrt(0.25 * (a - c) ** 2 + b * b)
        radius = 3.0 * math.sqrt(lam_max)
        mx, my = means[s, 0], means[s, 1]
        x0 = max(int(math.floor(mx - radius)), 0)
        x1 = min(int(math.ceil(mx + radius)), width - 1)
        y0 = max(int(math.floor(my - radius)), 0)
        y1 = min(int(math.ceil(my + radius)), height - 1)
        if x0 > x1 or y0 > y1:
            continue
        dxs = (np.arange(x0, x1 + 1) + 0.5) - mx
        dys = (np.arange(y0, y1 + 1) + 0.5) - my
        power = -0.5 * (
            inv00 * dxs[None, :] ** 2
            + 2.0 * inv01 * dys[:, None] * dxs[None, :]
            + inv11 * dys[:, None] ** 2
        )
        np.minimum(power, 0.0, out=power)
        alpha = opacities[s] * np.exp(power)
        np.minimum(alpha, alpha_clamp, out=alpha)
        tile_t = trans[y0 : y1 + 1, x0 : x1 + 1]
        live = (alpha >= alpha_min) & (tile_t >= t_min)
        weight = np.where(live, alpha * tile_t, 0.0)
        image[y0 : y1 + 1, x0 : x1 + 1] += weight[:, :, None] * colors[s]
        trans[y0 : y1 + 1, x0 : x1 + 1] = np.where(live, tile_t * (1.0 - alpha), tile_t)
