"""Hot finite-volume kernels.

Every kernel exists twice: a loop implementation (``*_loops``) compiled with
numba when available, and a vectorised numpy implementation (``*_numpy``).
The public name points at one of them according to :data:`etstir._accel.USE_NUMBA`.
Both are kept importable so tests and the benchmark can compare them.

Link classification
-------------------
A scalar control-volume problem is described by an ``active`` cell mask and
integer link kinds on the x-faces ``(nx+1, ny)`` and y-faces ``(nx, ny+1)``.
``bc_type[kind]`` says how a face of that kind behaves:

* ``COUPLED``   interior face, couples the two adjacent unknowns
* ``ZERO_FLUX`` no diffusive or advective transfer
* ``DIRICHLET`` boundary value ``bc_value[kind]`` at half a cell distance
* ``OUTFLOW``   zero-gradient; the face carries the cell value out
"""
from __future__ import annotations

import numpy as np

from ._accel import USE_NUMBA, njit

ZERO_FLUX = 0
DIRICHLET = 1
OUTFLOW = 2
COUPLED = 3


@njit
def _link(t, v, f_out, d):
    # returns (contribution to aP, neighbour coefficient, rhs coefficient)
    if t == COUPLED:
        return d + max(f_out, 0.0), d + max(-f_out, 0.0), 0.0
    if t == DIRICHLET:
        db = 2.0 * d
        return db + max(f_out, 0.0), 0.0, (db + max(-f_out, 0.0)) * v
    if t == OUTFLOW:
        return f_out, 0.0, 0.0
    return 0.0, 0.0, 0.0


@njit
def scalar_coefficients_loops(active, xlink, ylink, bc_type, bc_value, uf, vf,
                              gamma, conv, dx, dy):
    nx, ny = active.shape
    ap = np.zeros((nx, ny))
    aw = np.zeros((nx, ny))
    ae = np.zeros((nx, ny))
    as_ = np.zeros((nx, ny))
    an = np.zeros((nx, ny))
    b = np.zeros((nx, ny))
    dxf = gamma * dy / dx
    dyf = gamma * dx / dy
    for i in range(nx):
        for j in range(ny):
            if not active[i, j]:
                ap[i, j] = 1.0
                continue
            k = xlink[i, j]
            p, a, r = _link(bc_type[k], bc_value[k], -conv * uf[i, j] * dy, dxf)
            ap[i, j] += p
            aw[i, j] = a
            b[i, j] += r
            k = xlink[i + 1, j]
            p, a, r = _link(bc_type[k], bc_value[k], conv * uf[i + 1, j] * dy, dxf)
            ap[i, j] += p
            ae[i, j] = a
            b[i, j] += r
            k = ylink[i, j]
            p, a, r = _link(bc_type[k], bc_value[k], -conv * vf[i, j] * dx, dyf)
            ap[i, j] += p
            as_[i, j] = a
            b[i, j] += r
            k = ylink[i, j + 1]
            p, a, r = _link(bc_type[k], bc_value[k], conv * vf[i, j + 1] * dx, dyf)
            ap[i, j] += p
            an[i, j] = a
            b[i, j] += r
    return ap, aw, ae, as_, an, b


def _link_numpy(kind, bc_type, bc_value, f_out, d):
    t = bc_type[kind]
    pos = np.maximum(f_out, 0.0)
    neg = np.maximum(-f_out, 0.0)
    coupled = t == COUPLED
    dirichlet = t == DIRICHLET
    ap = np.where(coupled, d + pos, 0.0)
    ap = ap + np.where(dirichlet, 2.0 * d + pos, 0.0)
    ap = ap + np.where(t == OUTFLOW, f_out, 0.0)
    anb = np.where(coupled, d + neg, 0.0)
    rhs = np.where(dirichlet, (2.0 * d + neg) * bc_value[kind], 0.0)
    return ap, anb, rhs


def scalar_coefficients_numpy(active, xlink, ylink, bc_type, bc_value, uf, vf,
                              gamma, conv, dx, dy):
    dxf = gamma * dy / dx
    dyf = gamma * dx / dy
    pw, aw, rw = _link_numpy(xlink[:-1], bc_type, bc_value, -conv * uf[:-1] * dy, dxf)
    pe, ae, re = _link_numpy(xlink[1:], bc_type, bc_value, conv * uf[1:] * dy, dxf)
    ps, as_, rs = _link_numpy(ylink[:, :-1], bc_type, bc_value, -conv * vf[:, :-1] * dx, dyf)
    pn, an, rn = _link_numpy(ylink[:, 1:], bc_type, bc_value, conv * vf[:, 1:] * dx, dyf)
    ap = pw + pe + ps + pn
    b = rw + re + rs + rn
    off = ~active
    ap[off] = 1.0
    for arr in (aw, ae, as_, an, b):
        arr[off] = 0.0
    return ap, aw, ae, as_, an, b


@njit
def et_force_loops(ex, ey, gtx, gty, xactive, yactive, coulomb, dielectric):
    nx = ey.shape[0]
    ny = ex.shape[1]
    # cell-centred components for tangential interpolation
    exc = np.zeros((nx, ny))
    eyc = np.zeros((nx, ny))
    gxc = np.zeros((nx, ny))
    gyc = np.zeros((nx, ny))
    for i in range(nx):
        for j in range(ny):
            exc[i, j] = 0.5 * (ex[i, j] + ex[i + 1, j])
            eyc[i, j] = 0.5 * (ey[i, j] + ey[i, j + 1])
            gxc[i, j] = 0.5 * (gtx[i, j] + gtx[i + 1, j])
            gyc[i, j] = 0.5 * (gty[i, j] + gty[i, j + 1])
    fx = np.zeros((nx + 1, ny))
    fy = np.zeros((nx, ny + 1))
    for i in range(nx + 1):
        for j in range(ny):
            if not xactive[i, j]:
                continue
            il = max(i - 1, 0)
            ir = min(i, nx - 1)
            e1 = ex[i, j]
            e2 = 0.5 * (eyc[il, j] + eyc[ir, j])
            g1 = gtx[i, j]
            g2 = 0.5 * (gyc[il, j] + gyc[ir, j])
            dot = g1 * e1 + g2 * e2
            fx[i, j] = coulomb * dot * e1 + dielectric * (e1 * e1 + e2 * e2) * g1
    for i in range(nx):
        for j in range(ny + 1):
            if not yactive[i, j]:
                continue
            jl = max(j - 1, 0)
            jr = min(j, ny - 1)
            e1 = ey[i, j]
            e2 = 0.5 * (exc[i, jl] + exc[i, jr])
            g1 = gty[i, j]
            g2 = 0.5 * (gxc[i, jl] + gxc[i, jr])
            dot = g1 * e1 + g2 * e2
            fy[i, j] = coulomb * dot * e1 + dielectric * (e1 * e1 + e2 * e2) * g1
    return fx, fy


def _to_xfaces(c):
    # average of the two adjacent cells, clamped at the domain edge
    padded = np.concatenate([c[:1], c, c[-1:]], axis=0)
    return 0.5 * (padded[:-1] + padded[1:])


def _to_yfaces(c):
    padded = np.concatenate([c[:, :1], c, c[:, -1:]], axis=1)
    return 0.5 * (padded[:, :-1] + padded[:, 1:])


def et_force_numpy(ex, ey, gtx, gty, xactive, yactive, coulomb, dielectric):
    exc = 0.5 * (ex[:-1] + ex[1:])
    eyc = 0.5 * (ey[:, :-1] + ey[:, 1:])
    gxc = 0.5 * (gtx[:-1] + gtx[1:])
    gyc = 0.5 * (gty[:, :-1] + gty[:, 1:])

    e2 = _to_xfaces(eyc)
    g2 = _to_xfaces(gyc)
    dot = gtx * ex + g2 * e2
    fx = coulomb * dot * ex + dielectric * (ex * ex + e2 * e2) * gtx
    fx = np.where(xactive, fx, 0.0)

    e2 = _to_yfaces(exc)
    g2 = _to_yfaces(gxc)
    dot = gty * ey + g2 * e2
    fy = coulomb * dot * ey + dielectric * (ey * ey + e2 * e2) * gty
    fy = np.where(yactive, fy, 0.0)
    return fx, fy


if USE_NUMBA:
    scalar_coefficients = scalar_coefficients_loops
    et_force = et_force_loops
else:
    scalar_coefficients = scalar_coefficients_numpy
    et_force = et_force_numpy
