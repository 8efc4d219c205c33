"""Numba-compiled pairwise kernel loops.

The pairwise Biot-Savart evaluations and their partial derivatives
dominate simulation and Jacobian-assembly cost; the fused scalar loops
here avoid the large temporaries of the vectorized numpy formulation.
Row n of every output is written by a single thread, so results are
deterministic regardless of thread count. Each loop is compiled twice,
serial and parallel, because the parallel launch overhead exceeds the
work for small point sets; dispatchers pick by pair count. Callers check
HAVE_NUMBA and keep the numpy path as reference.
"""

import math

import numpy as np

try:
    from numba import njit, prange

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a hard dependency
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        def deco(f):
            return f

        return deco

    prange = range

TWO_PI = 2.0 * math.pi
FOUR_PI = 4.0 * math.pi

# Below this many point-element pairs the serial versions win.
PARALLEL_CUTOFF = 60_000


def _induced_sum_2d_impl(points, vortices, gammas, sigma, eps):
    n, m = points.shape[0], vortices.shape[0]
    out = np.zeros((n, 2))
    inv_s2 = 1.0 / (sigma * sigma)
    for i in prange(n):
        px, py = points[i, 0], points[i, 1]
        ux = 0.0
        uy = 0.0
        for j in range(m):
            rx = vortices[j, 0] - px
            ry = vortices[j, 1] - py
            d2 = rx * rx + ry * ry
            if d2 < eps:
                continue
            fac = gammas[j] / (TWO_PI * d2) * (-math.expm1(-d2 * inv_s2))
            ux += -ry * fac
            uy += rx * fac
        out[i, 0] = ux
        out[i, 1] = uy
    return out


@njit(parallel=True, cache=True)
def kernel_partials_2d_pairs(points, vortices, gammas, sigma, eps):
    n, m = points.shape[0], vortices.shape[0]
    du_dr = np.zeros((n, m, 2, 2))
    unit = np.zeros((n, m, 2))
    ndeg = 0
    inv_s2 = 1.0 / (sigma * sigma)
    for i in prange(n):
        px, py = points[i, 0], points[i, 1]
        for j in range(m):
            rx = vortices[j, 0] - px
            ry = vortices[j, 1] - py
            d2 = rx * rx + ry * ry
            if d2 < eps:
                ndeg += 1
                continue
            inv = 1.0 / d2
            gam = gammas[j]
            circ = gam * inv / TWO_PI
            ex = math.exp(-d2 * inv_s2)
            core = -math.expm1(-d2 * inv_s2)
            cc = circ * core
            gx = -ry
            gy = rx
            dcirc_x = -gam / math.pi * rx * inv * inv
            dcirc_y = -gam / math.pi * ry * inv * inv
            dcore_x = 2.0 * rx * inv_s2 * ex
            dcore_y = 2.0 * ry * inv_s2 * ex
            hx = dcirc_x * core + dcore_x * circ
            hy = dcirc_y * core + dcore_y * circ
            du_dr[i, j, 0, 0] = gx * hx
            du_dr[i, j, 0, 1] = -cc + gx * hy
            du_dr[i, j, 1, 0] = cc + gy * hx
            du_dr[i, j, 1, 1] = gy * hy
            uf = core * inv / TWO_PI
            unit[i, j, 0] = gx * uf
            unit[i, j, 1] = gy * uf
    return du_dr, unit, ndeg


def _induced_sum_3d_impl(points, start, end, gammas, sigma, eps):
    n, m = points.shape[0], start.shape[0]
    out = np.zeros((n, 3))
    inv_s2 = 1.0 / (sigma * sigma)
    r0 = np.empty((m, 3))
    il0sq = np.empty(m)
    gfac = np.empty(m)
    for j in range(m):
        r0[j, 0] = end[j, 0] - start[j, 0]
        r0[j, 1] = end[j, 1] - start[j, 1]
        r0[j, 2] = end[j, 2] - start[j, 2]
        l0sq = r0[j, 0] ** 2 + r0[j, 1] ** 2 + r0[j, 2] ** 2
        il0sq[j] = 1.0 / l0sq if l0sq >= eps else -1.0
        gfac[j] = gammas[j] / FOUR_PI
    for i in prange(n):
        px, py, pz = points[i, 0], points[i, 1], points[i, 2]
        ux = 0.0
        uy = 0.0
        uz = 0.0
        for j in range(m):
            r1x = start[j, 0] - px
            r1y = start[j, 1] - py
            r1z = start[j, 2] - pz
            r2x = end[j, 0] - px
            r2y = end[j, 1] - py
            r2z = end[j, 2] - pz
            cx = r1y * r2z - r1z * r2y
            cy = r1z * r2x - r1x * r2z
            cz = r1x * r2y - r1y * r2x
            c2 = cx * cx + cy * cy + cz * cz
            if c2 < eps or il0sq[j] < 0.0:
                continue
            il1 = 1.0 / math.sqrt(r1x * r1x + r1y * r1y + r1z * r1z)
            il2 = 1.0 / math.sqrt(r2x * r2x + r2y * r2y + r2z * r2z)
            dx = r1x * il1 - r2x * il2
            dy = r1y * il1 - r2y * il2
            dz = r1z * il1 - r2z * il2
            proj = r0[j, 0] * dx + r0[j, 1] * dy + r0[j, 2] * dz
            core = -math.expm1(-c2 * inv_s2 * il0sq[j])
            fac = gfac[j] / c2 * proj * core
            ux += cx * fac
            uy += cy * fac
            uz += cz * fac
        out[i, 0] = ux
        out[i, 1] = uy
        out[i, 2] = uz
    return out


@njit(parallel=True, cache=True)
def kernel_partials_3d_pairs(points, start, end, gammas, sigma, eps):
    n, m = points.shape[0], start.shape[0]
    du_dx0 = np.zeros((n, m, 3, 3))
    du_dx1 = np.zeros((n, m, 3, 3))
    du_dx2 = np.zeros((n, m, 3, 3))
    unit = np.zeros((n, m, 3))
    ndeg = 0
    inv_s2 = 1.0 / (sigma * sigma)
    for i in prange(n):
        c = np.empty(3)
        r0 = np.empty(3)
        r1 = np.empty(3)
        r2 = np.empty(3)
        dlv = np.empty(3)
        dp0 = np.empty(3)
        dp1 = np.empty(3)
        dp2 = np.empty(3)
        dc0 = np.empty(3)
        dc1 = np.empty(3)
        dc2 = np.empty(3)
        u0 = np.empty(3)
        w = np.empty(3)
        a1col = np.empty(3)
        a2col = np.empty(3)
        for j in range(m):
            for d in range(3):
                r0[d] = end[j, d] - start[j, d]
                r1[d] = start[j, d] - points[i, d]
                r2[d] = end[j, d] - points[i, d]
            c[0] = r1[1] * r2[2] - r1[2] * r2[1]
            c[1] = r1[2] * r2[0] - r1[0] * r2[2]
            c[2] = r1[0] * r2[1] - r1[1] * r2[0]
            c2 = c[0] * c[0] + c[1] * c[1] + c[2] * c[2]
            l0sq = r0[0] * r0[0] + r0[1] * r0[1] + r0[2] * r0[2]
            if c2 < eps or l0sq < eps:
                ndeg += 1
                continue
            il1 = 1.0 / math.sqrt(r1[0] ** 2 + r1[1] ** 2 + r1[2] ** 2)
            il2 = 1.0 / math.sqrt(r2[0] ** 2 + r2[1] ** 2 + r2[2] ** 2)
            l1 = 1.0 / il1
            l2 = 1.0 / il2
            for d in range(3):
                dlv[d] = r1[d] * il1 - r2[d] * il2
            proj = r0[0] * dlv[0] + r0[1] * dlv[1] + r0[2] * dlv[2]
            ginv = inv_s2 / l0sq
            g = c2 * ginv
            ex = math.exp(-g)
            core = -math.expm1(-g)
            gam4pi = gammas[j] / FOUR_PI
            inv_c2 = 1.0 / c2
            for d in range(3):
                u0[d] = gam4pi * c[d] * inv_c2
                unit[i, j, d] = c[d] * inv_c2 / FOUR_PI * proj * core
            pc = proj * core

            # dproj terms
            rdot1 = r0[0] * r1[0] + r0[1] * r1[1] + r0[2] * r1[2]
            rdot2 = r0[0] * r2[0] + r0[1] * r2[1] + r0[2] * r2[2]
            il13 = il1 * il1 * il1
            il23 = il2 * il2 * il2
            for d in range(3):
                dp0[d] = dlv[d]
                dp1[d] = (l1 * l1 * r0[d] - rdot1 * r1[d]) * il13
                dp2[d] = -(l2 * l2 * r0[d] - rdot2 * r2[d]) * il23

            # dcore terms
            cfac = -ex * 2.0 * c2 * ginv / l0sq
            hfac = ex * 2.0 * ginv
            for d in range(3):
                dc0[d] = cfac * r0[d]
            # r2 x c and c x r1
            dc1[0] = hfac * (r2[1] * c[2] - r2[2] * c[1])
            dc1[1] = hfac * (r2[2] * c[0] - r2[0] * c[2])
            dc1[2] = hfac * (r2[0] * c[1] - r2[1] * c[0])
            dc2[0] = hfac * (c[1] * r1[2] - c[2] * r1[1])
            dc2[1] = hfac * (c[2] * r1[0] - c[0] * r1[2])
            dc2[2] = hfac * (c[0] * r1[1] - c[1] * r1[0])

            # geometric factor: A1 = M @ skew(r2)^T, A2 = M @ skew(r1),
            # with M w = (c2 w - 2 c (c.w)) / c2^2 applied columnwise.
            for col in range(3):
                if col == 0:
                    w[0], w[1], w[2] = 0.0, -r2[2], r2[1]
                elif col == 1:
                    w[0], w[1], w[2] = r2[2], 0.0, -r2[0]
                else:
                    w[0], w[1], w[2] = -r2[1], r2[0], 0.0
                cw = c[0] * w[0] + c[1] * w[1] + c[2] * w[2]
                for d in range(3):
                    a1col[d] = (c2 * w[d] - 2.0 * c[d] * cw) * inv_c2 * inv_c2

                if col == 0:
                    w[0], w[1], w[2] = 0.0, r1[2], -r1[1]
                elif col == 1:
                    w[0], w[1], w[2] = -r1[2], 0.0, r1[0]
                else:
                    w[0], w[1], w[2] = r1[1], -r1[0], 0.0
                cw = c[0] * w[0] + c[1] * w[1] + c[2] * w[2]
                for d in range(3):
                    a2col[d] = (c2 * w[d] - 2.0 * c[d] * cw) * inv_c2 * inv_c2

                for d in range(3):
                    dr0 = u0[d] * (dp0[col] * core + dc0[col] * proj)
                    dr1v = gam4pi * a1col[d] * pc + u0[d] * (
                        dp1[col] * core + dc1[col] * proj
                    )
                    dr2v = gam4pi * a2col[d] * pc + u0[d] * (
                        dp2[col] * core + dc2[col] * proj
                    )
                    du_dx0[i, j, d, col] = -dr1v - dr2v
                    du_dx1[i, j, d, col] = dr1v - dr0
                    du_dx2[i, j, d, col] = dr2v + dr0
    return du_dx0, du_dx1, du_dx2, unit, ndeg


def _scattered_partials_2d_impl(points, vortices, gam_signed, signs, sigma, eps):
    """Position partials scattered into state-Jacobian layout.

    Returns (src, eval_sum, dgamma, ndeg) with src[n, i, m, j] the
    derivative of induced-velocity component i at point n w.r.t.
    coordinate j of source point m, eval_sum the derivative w.r.t. the
    point itself, and dgamma w.r.t. the stored circulations.
    """
    n, m = points.shape[0], vortices.shape[0]
    src = np.zeros((n, 2, m, 2))
    eval_sum = np.zeros((n, 2, 2))
    dgamma = np.zeros((n, 2, m))
    ndeg = 0
    inv_s2 = 1.0 / (sigma * sigma)
    for i in prange(n):
        px, py = points[i, 0], points[i, 1]
        for j in range(m):
            rx = vortices[j, 0] - px
            ry = vortices[j, 1] - py
            d2 = rx * rx + ry * ry
            if d2 < eps:
                ndeg += 1
                continue
            inv = 1.0 / d2
            gam = gam_signed[j]
            circ = gam * inv / TWO_PI
            ex = math.exp(-d2 * inv_s2)
            core = -math.expm1(-d2 * inv_s2)
            cc = circ * core
            gx = -ry
            gy = rx
            dcirc_x = -gam / math.pi * rx * inv * inv
            dcirc_y = -gam / math.pi * ry * inv * inv
            dcore_x = 2.0 * rx * inv_s2 * ex
            dcore_y = 2.0 * ry * inv_s2 * ex
            hx = dcirc_x * core + dcore_x * circ
            hy = dcirc_y * core + dcore_y * circ
            d00 = gx * hx
            d01 = -cc + gx * hy
            d10 = cc + gy * hx
            d11 = gy * hy
            src[i, 0, j, 0] = d00
            src[i, 0, j, 1] = d01
            src[i, 1, j, 0] = d10
            src[i, 1, j, 1] = d11
            eval_sum[i, 0, 0] -= d00
            eval_sum[i, 0, 1] -= d01
            eval_sum[i, 1, 0] -= d10
            eval_sum[i, 1, 1] -= d11
            uf = core * inv / TWO_PI
            dgamma[i, 0, j] = signs[j] * gx * uf
            dgamma[i, 1, j] = signs[j] * gy * uf
    return src, eval_sum, dgamma, ndeg


def _scattered_partials_3d_impl(points, start, end, gam_signed, signs, sigma, eps, n_e, n_p):
    """3D filament partials scattered into state-Jacobian layout.

    Element m belongs to ring m // n_e; its start point has global index
    (m // n_e) * n_p + (m % n_e) and its end point the next one. src has
    columns over all n_r * n_p points.
    """
    n, m = points.shape[0], start.shape[0]
    n_pts = (m // n_e) * n_p
    src = np.zeros((n, 3, n_pts, 3))
    eval_sum = np.zeros((n, 3, 3))
    dgamma = np.zeros((n, 3, m))
    ndeg = 0
    inv_s2 = 1.0 / (sigma * sigma)
    for i in prange(n):
        c = np.empty(3)
        r0 = np.empty(3)
        r1 = np.empty(3)
        r2 = np.empty(3)
        dlv = np.empty(3)
        dp0 = np.empty(3)
        dp1 = np.empty(3)
        dp2 = np.empty(3)
        dc0 = np.empty(3)
        dc1 = np.empty(3)
        dc2 = np.empty(3)
        u0 = np.empty(3)
        w = np.empty(3)
        a1col = np.empty(3)
        a2col = np.empty(3)
        for j in range(m):
            p1 = (j // n_e) * n_p + (j % n_e)
            p2 = p1 + 1
            for d in range(3):
                r0[d] = end[j, d] - start[j, d]
                r1[d] = start[j, d] - points[i, d]
                r2[d] = end[j, d] - points[i, d]
            c[0] = r1[1] * r2[2] - r1[2] * r2[1]
            c[1] = r1[2] * r2[0] - r1[0] * r2[2]
            c[2] = r1[0] * r2[1] - r1[1] * r2[0]
            c2 = c[0] * c[0] + c[1] * c[1] + c[2] * c[2]
            l0sq = r0[0] * r0[0] + r0[1] * r0[1] + r0[2] * r0[2]
            if c2 < eps or l0sq < eps:
                ndeg += 1
                continue
            il1 = 1.0 / math.sqrt(r1[0] ** 2 + r1[1] ** 2 + r1[2] ** 2)
            il2 = 1.0 / math.sqrt(r2[0] ** 2 + r2[1] ** 2 + r2[2] ** 2)
            l1 = 1.0 / il1
            l2 = 1.0 / il2
            for d in range(3):
                dlv[d] = r1[d] * il1 - r2[d] * il2
            proj = r0[0] * dlv[0] + r0[1] * dlv[1] + r0[2] * dlv[2]
            ginv = inv_s2 / l0sq
            g = c2 * ginv
            ex = math.exp(-g)
            core = -math.expm1(-g)
            gam4pi = gam_signed[j] / FOUR_PI
            inv_c2 = 1.0 / c2
            for d in range(3):
                u0[d] = gam4pi * c[d] * inv_c2
                dgamma[i, d, j] = signs[j] * c[d] * inv_c2 / FOUR_PI * proj * core
            pc = proj * core

            rdot1 = r0[0] * r1[0] + r0[1] * r1[1] + r0[2] * r1[2]
            rdot2 = r0[0] * r2[0] + r0[1] * r2[1] + r0[2] * r2[2]
            il13 = il1 * il1 * il1
            il23 = il2 * il2 * il2
            for d in range(3):
                dp0[d] = dlv[d]
                dp1[d] = (l1 * l1 * r0[d] - rdot1 * r1[d]) * il13
                dp2[d] = -(l2 * l2 * r0[d] - rdot2 * r2[d]) * il23

            cfac = -ex * 2.0 * c2 * ginv / l0sq
            hfac = ex * 2.0 * ginv
            for d in range(3):
                dc0[d] = cfac * r0[d]
            dc1[0] = hfac * (r2[1] * c[2] - r2[2] * c[1])
            dc1[1] = hfac * (r2[2] * c[0] - r2[0] * c[2])
            dc1[2] = hfac * (r2[0] * c[1] - r2[1] * c[0])
            dc2[0] = hfac * (c[1] * r1[2] - c[2] * r1[1])
            dc2[1] = hfac * (c[2] * r1[0] - c[0] * r1[2])
            dc2[2] = hfac * (c[0] * r1[1] - c[1] * r1[0])

            for col in range(3):
                if col == 0:
                    w[0], w[1], w[2] = 0.0, -r2[2], r2[1]
                elif col == 1:
                    w[0], w[1], w[2] = r2[2], 0.0, -r2[0]
                else:
                    w[0], w[1], w[2] = -r2[1], r2[0], 0.0
                cw = c[0] * w[0] + c[1] * w[1] + c[2] * w[2]
                for d in range(3):
                    a1col[d] = (c2 * w[d] - 2.0 * c[d] * cw) * inv_c2 * inv_c2

                if col == 0:
                    w[0], w[1], w[2] = 0.0, r1[2], -r1[1]
                elif col == 1:
                    w[0], w[1], w[2] = -r1[2], 0.0, r1[0]
                else:
                    w[0], w[1], w[2] = r1[1], -r1[0], 0.0
                cw = c[0] * w[0] + c[1] * w[1] + c[2] * w[2]
                for d in range(3):
                    a2col[d] = (c2 * w[d] - 2.0 * c[d] * cw) * inv_c2 * inv_c2

                for d in range(3):
                    dr0 = u0[d] * (dp0[col] * core + dc0[col] * proj)
                    dr1v = gam4pi * a1col[d] * pc + u0[d] * (
                        dp1[col] * core + dc1[col] * proj
                    )
                    dr2v = gam4pi * a2col[d] * pc + u0[d] * (
                        dp2[col] * core + dc2[col] * proj
                    )
                    src[i, d, p1, col] += dr1v - dr0
                    src[i, d, p2, col] += dr2v + dr0
                    eval_sum[i, d, col] += -dr1v - dr2v
    return src, eval_sum, dgamma, ndeg


def _dual(impl):
    """Compile serial and parallel variants of one pairwise loop."""
    if not HAVE_NUMBA:
        return impl, impl
    return (
        njit(cache=True, fastmath=True)(impl),
        njit(parallel=True, cache=True, fastmath=True)(impl),
    )


_sum2_ser, _sum2_par = _dual(_induced_sum_2d_impl)
_sum3_ser, _sum3_par = _dual(_induced_sum_3d_impl)
_sc2_ser, _sc2_par = _dual(_scattered_partials_2d_impl)
_sc3_ser, _sc3_par = _dual(_scattered_partials_3d_impl)


def induced_sum_2d(points, vortices, gammas, sigma, eps):
    small = points.shape[0] * vortices.shape[0] < PARALLEL_CUTOFF
    f = _sum2_ser if small else _sum2_par
    return f(points, vortices, gammas, sigma, eps)


def induced_sum_3d(points, start, end, gammas, sigma, eps):
    small = points.shape[0] * start.shape[0] < PARALLEL_CUTOFF
    f = _sum3_ser if small else _sum3_par
    return f(points, start, end, gammas, sigma, eps)


def scattered_partials_2d(points, vortices, gam_signed, signs, sigma, eps):
    small = points.shape[0] * vortices.shape[0] < PARALLEL_CUTOFF
    f = _sc2_ser if small else _sc2_par
    return f(points, vortices, gam_signed, signs, sigma, eps)


def scattered_partials_3d(points, start, end, gam_signed, signs, sigma, eps, n_e, n_p):
    small = points.shape[0] * start.shape[0] < PARALLEL_CUTOFF
    f = _sc3_ser if small else _sc3_par
    return f(points, start, end, gam_signed, signs, sigma, eps, n_e, n_p)
