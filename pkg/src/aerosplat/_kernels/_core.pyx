# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot loops: B-spline transfers and splat compositing.

Function-for-function twin of numpy_backend.py.  Callers guarantee that
every particle stencil lies inside the grid; there is no bounds checking
here.
"""

from libc.math cimport ceil, exp, floor, sqrt

import numpy as np


def p2g_scatter(double[:, ::1] x, double[:, ::1] v, double[::1] mass,
                double[::1] volume0, double[:, :, ::1] c_affine,
                double[:, :, ::1] stress, double[::1] origin, double dx,
                double[:, :, ::1] grid_mass, double[:, :, :, ::1] grid_mom,
                double[:, :, :, ::1] grid_force):
    """Scatter mass, APIC momentum and internal stress forces onto the grid."""
    cdef Py_ssize_t n = x.shape[0]
    cdef Py_ssize_t p, a, i, j, k, ni, nj, nk
    cdef Py_ssize_t base[3]
    cdef double w[3][3]
    cdef double dw[3][3]
    cdef double fx[3]
    cdef double inv_dx = 1.0 / dx
    cdef double u, f, m_p, vol, wijk, gwx, gwy, gwz
    cdef double dpos0, dpos1, dpos2, cv0, cv1, cv2, wm

    for p in range(n):
        for a in range(3):
            u = (x[p, a] - origin[a]) * inv_dx
            base[a] = <Py_ssize_t>floor(u - 0.5)
            f = u - base[a]
            fx[a] = f
            w[a][0] = 0.5 * (1.5 - f) * (1.5 - f)
            w[a][1] = 0.75 - (f - 1.0) * (f - 1.0)
            w[a][2] = 0.5 * (f - 0.5) * (f - 0.5)
            dw[a][0] = (f - 1.5) * inv_dx
            dw[a][1] = -2.0 * (f - 1.0) * inv_dx
            dw[a][2] = (f - 0.5) * inv_dx
        m_p = mass[p]
        vol = volume0[p]
        for i in range(3):
            for j in range(3):
                for k in range(3):
                    wijk = w[0][i] * w[1][j] * w[2][k]
                    gwx = dw[0][i] * w[1][j] * w[2][k]
                    gwy = w[0][i] * dw[1][j] * w[2][k]
                    gwz = w[0][i] * w[1][j] * dw[2][k]
                    dpos0 = (i - fx[0]) * dx
                    dpos1 = (j - fx[1]) * dx
                    dpos2 = (k - fx[2]) * dx
                    ni = base[0] + i
                    nj = base[1] + j
                    nk = base[2] + k
                    wm = wijk * m_p
                    grid_mass[ni, nj, nk] += wm
                    cv0 = v[p, 0] + c_affine[p, 0, 0] * dpos0 + c_affine[p, 0, 1] * dpos1 + c_affine[p, 0, 2] * dpos2
                    cv1 = v[p, 1] + c_affine[p, 1, 0] * dpos0 + c_affine[p, 1, 1] * dpos1 + c_affine[p, 1, 2] * dpos2
                    cv2 = v[p, 2] + c_affine[p, 2, 0] * dpos0 + c_affine[p, 2, 1] * dpos1 + c_affine[p, 2, 2] * dpos2
                    grid_mom[ni, nj, nk, 0] += wm * cv0
                    grid_mom[ni, nj, nk, 1] += wm * cv1
                    grid_mom[ni, nj, nk, 2] += wm * cv2
                    grid_force[ni, nj, nk, 0] -= (stress[p, 0, 0] * gwx + stress[p, 0, 1] * gwy + stress[p, 0, 2] * gwz) * vol
                    grid_force[ni, nj, nk, 1] -= (stress[p, 1, 0] * gwx + stress[p, 1, 1] * gwy + stress[p, 1, 2] * gwz) * vol
                    grid_force[ni, nj, nk, 2] -= (stress[p, 2, 0] * gwx + stress[p, 2, 1] * gwy + stress[p, 2, 2] * gwz) * vol


def scatter_forces(double[:, ::1] x, double[:, ::1] forces, double[::1] origin,
                   double dx, double[:, :, :, ::1] grid_force):
    """Distribute per-particle external forces onto grid nodes by weight."""
    cdef Py_ssize_t n = x.shape[0]
    cdef Py_ssize_t p, a, i, j, k
    cdef Py_ssize_t base[3]
    cdef double w[3][3]
    cdef double inv_dx = 1.0 / dx
    cdef double u, f, wijk

    for p in range(n):
        for a in range(3):
            u = (x[p, a] - origin[a]) * inv_dx
            base[a] = <Py_ssize_t>floor(u - 0.5)
            f = u - base[a]
            w[a][0] = 0.5 * (1.5 - f) * (1.5 - f)
            w[a][1] = 0.75 - (f - 1.0) * (f - 1.0)
            w[a][2] = 0.5 * (f - 0.5) * (f - 0.5)
        for i in range(3):
            for j in range(3):
                for k in range(3):
                    wijk = w[0][i] * w[1][j] * w[2][k]
                    grid_force[base[0] + i, base[1] + j, base[2] + k, 0] += wijk * forces[p, 0]
                    grid_force[base[0] + i, base[1] + j, base[2] + k, 1] += wijk * forces[p, 1]
                    grid_force[base[0] + i, base[1] + j, base[2] + k, 2] += wijk * forces[p, 2]


def grid_update(double[:, :, ::1] mass, double[:, :, :, ::1] momentum,
                double[:, :, :, ::1] force, unsigned char[:, :, :, ::1] sticky,
                unsigned char[:, :, ::1] pinned, double[:, :, :, ::1] velocity,
                double dt, double[::1] gravity, long[::1] lo, long[::1] hi,
                double mass_floor):
    """Nodal velocity update on the index box [lo, hi): momentum plus
    impulses over mass, gravity on massive nodes, boundary conditions."""
    cdef Py_ssize_t i, j, k, a
    cdef double m, inv
    cdef double vout[3]
    for i in range(lo[0], hi[0]):
        for j in range(lo[1], hi[1]):
            for k in range(lo[2], hi[2]):
                m = mass[i, j, k]
                if m > mass_floor:
                    inv = 1.0 / m
                    for a in range(3):
                        vout[a] = (momentum[i, j, k, a] + dt * force[i, j, k, a]) * inv + dt * gravity[a]
                else:
                    vout[0] = 0.0
                    vout[1] = 0.0
                    vout[2] = 0.0
                for a in range(3):
                    if sticky[i, j, k, a]:
                        vout[a] = 0.0
                if pinned[i, j, k]:
                    vout[0] = 0.0
                    vout[1] = 0.0
                    vout[2] = 0.0
                velocity[i, j, k, 0] = vout[0]
                velocity[i, j, k, 1] = vout[1]
                velocity[i, j, k, 2] = vout[2]


def g2p_gather(double[:, ::1] x, double[:, ::1] v, double[:, :, ::1] c_affine,
               double[:, :, ::1] f_grad, unsigned char[::1] is_pinned,
               double[:, :, :, ::1] grid_v, double[::1] origin, double dx,
               double dt):
    """Gather velocities back to particles; advect and update C and F.

    Returns the maximum particle speed after the update.
    """
    cdef Py_ssize_t n = x.shape[0]
    cdef Py_ssize_t p, a, b, i, j, k, ni, nj, nk
    cdef Py_ssize_t base[3]
    cdef double w[3][3]
    cdef double dw[3][3]
    cdef double fx[3]
    cdef double vp[3]
    cdef double cp[3][3]
    cdef double gv[3][3]
    cdef double fnew[3][3]
    cdef double nv[3]
    cdef double gw[3]
    cdef double inv_dx = 1.0 / dx
    cdef double c_coeff = 4.0 / (dx * dx)
    cdef double u, f, wijk, dpos0, dpos1, dpos2, speed2, max_speed2 = 0.0

    for p in range(n):
        for a in range(3):
            u = (x[p, a] - origin[a]) * inv_dx
            base[a] = <Py_ssize_t>floor(u - 0.5)
            f = u - base[a]
            fx[a] = f
            w[a][0] = 0.5 * (1.5 - f) * (1.5 - f)
            w[a][1] = 0.75 - (f - 1.0) * (f - 1.0)
            w[a][2] = 0.5 * (f - 0.5) * (f - 0.5)
            dw[a][0] = (f - 1.5) * inv_dx
            dw[a][1] = -2.0 * (f - 1.0) * inv_dx
            dw[a][2] = (f - 0.5) * inv_dx
        for a in range(3):
            vp[a] = 0.0
            for b in range(3):
                cp[a][b] = 0.0
                gv[a][b] = 0.0
        for i in range(3):
            for j in range(3):
                for k in range(3):
                    wijk = w[0][i] * w[1][j] * w[2][k]
                    gw[0] = dw[0][i] * w[1][j] * w[2][k]
                    gw[1] = w[0][i] * dw[1][j] * w[2][k]
                    gw[2] = w[0][i] * w[1][j] * dw[2][k]
                    dpos0 = (i - fx[0]) * dx
                    dpos1 = (j - fx[1]) * dx
                    dpos2 = (k - fx[2]) * dx
                    ni = base[0] + i
                    nj = base[1] + j
                    nk = base[2] + k
                    nv[0] = grid_v[ni, nj, nk, 0]
                    nv[1] = grid_v[ni, nj, nk, 1]
                    nv[2] = grid_v[ni, nj, nk, 2]
                    for a in range(3):
                        vp[a] += wijk * nv[a]
                        cp[a][0] += wijk * nv[a] * dpos0
                        cp[a][1] += wijk * nv[a] * dpos1
                        cp[a][2] += wijk * nv[a] * dpos2
                        gv[a][0] += nv[a] * gw[0]
                        gv[a][1] += nv[a] * gw[1]
                        gv[a][2] += nv[a] * gw[2]
        if is_pinned[p]:
            vp[0] = 0.0
            vp[1] = 0.0
            vp[2] = 0.0
        for a in range(3):
            v[p, a] = vp[a]
            x[p, a] += dt * vp[a]
            for b in range(3):
                c_affine[p, a, b] = c_coeff * cp[a][b]
        # F <- (I + dt * grad_v) F
        for a in range(3):
            for b in range(3):
                fnew[a][b] = (
                    f_grad[p, a, b]
                    + dt * (gv[a][0] * f_grad[p, 0, b]
                            + gv[a][1] * f_grad[p, 1, b]
                            + gv[a][2] * f_grad[p, 2, b])
                )
        for a in range(3):
            for b in range(3):
                f_grad[p, a, b] = fnew[a][b]
        speed2 = vp[0] * vp[0] + vp[1] * vp[1] + vp[2] * vp[2]
        if speed2 > max_speed2:
            max_speed2 = speed2
    return sqrt(max_speed2)


def composite_splats(double[:, ::1] means, double[:, :, ::1] covs,
                     double[:, ::1] colors, double[::1] opacities,
                     double[:, :, ::1] image, double alpha_clamp,
                     double alpha_min, double t_min):
    """Front-to-back alpha blend of depth-sorted splats into ``image``."""
    cdef Py_ssize_t height = image.shape[0]
    cdef Py_ssize_t width = image.shape[1]
    cdef Py_ssize_t m = means.shape[0]
    cdef Py_ssize_t s, px, py, x0, x1, y0, y1
    cdef double a, b, c, det, inv00, inv01, inv11, lam_max, radius
    cdef double mx, my, ddx, ddy, power, alpha, weight, t
    trans_arr = np.ones((height, width))
    cdef double[:, ::1] trans = trans_arr

    for s in range(m):
        a = covs[s, 0, 0]
        b = covs[s, 0, 1]
        c = covs[s, 1, 1]
        det = a * c - b * b
        if det <= 0.0:
            continue
        inv00 = c / det
        inv01 = -b / det
        inv11 = a / det
        lam_max = 0.5 * (a + c) + sqrt(0.25 * (a - c) * (a - c) + b * b)
        radius = 3.0 * sqrt(lam_max)
        mx = means[s, 0]
        my = means[s, 1]
        x0 = <Py_ssize_t>floor(mx - radius)
        x1 = <Py_ssize_t>ceil(mx + radius)
        y0 = <Py_ssize_t>floor(my - radius)
        y1 = <Py_ssize_t>ceil(my + radius)
        if x0 < 0:
            x0 = 0
        if y0 < 0:
            y0 = 0
        if x1 > width - 1:
            x1 = width - 1
        if y1 > height - 1:
            y1 = height - 1
        for py in range(y0, y1 + 1):
            ddy = (py + 0.5) - my
            for px in range(x0, x1 + 1):
                t = trans[py, px]
                if t < t_min:
                    continue
                ddx = (px + 0.5) - mx
                power = -0.5 * (inv00 * ddx * ddx + 2.0 * inv01 * ddy * ddx + inv11 * ddy * ddy)
                if power > 0.0:
                    power = 0.0
                alpha = opacities[s] * exp(power)
                if alpha > alpha_clamp:
                    alpha = alpha_clamp
                if alpha < alpha_min:
                    continue
                weight = alpha * t
                image[py, px, 0] += weight * colors[s, 0]
                image[py, px, 1] += weight * colors[s, 1]
                image[py, px, 2] += weight * colors[s, 2]
                trans[py, px] = t * (1.0 - alpha)
