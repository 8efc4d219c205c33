"""Biot-Savart induced-velocity kernels with Gaussian core regularization.

2D wakes are built from point vortices, 3D wakes from straight vortex
filament segments. Both kernels multiply a geometric factor, a circulation
factor and a smooth core factor; the analytic partial derivatives used for
Jacobian assembly are exact derivatives of the regularized forward kernels.

Evaluation points that coincide with a vortex point (2D) or lie on the
carrier line of a filament (3D) receive zero induced velocity so the
forward simulation never faults; the derivative routines instead flag
these inputs as degenerate.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# Squared-norm threshold below which geometry counts as degenerate
# (coincident points in 2D, collinear point/filament in 3D).
DEGENERATE_EPS = 1e-24

TWO_PI = 2.0 * np.pi
FOUR_PI = 4.0 * np.pi


@dataclass
class KernelPartials2D:
    """Derivatives of the 2D point-vortex kernel at one (x0, x1) pair."""

    du_dx0: np.ndarray  # (2, 2), derivative w.r.t. evaluation point
    du_dx1: np.ndarray  # (2, 2), derivative w.r.t. vortex position
    du_dgamma: np.ndarray  # (2,)


@dataclass
class KernelPartials3D:
    """Derivatives of the 3D filament kernel at one (x0, x1, x2) triple."""

    du_dx0: np.ndarray  # (3, 3)
    du_dx1: np.ndarray  # (3, 3)
    du_dx2: np.ndarray  # (3, 3)
    du_dgamma: np.ndarray  # (3,)


class DegenerateKernelInput(ValueError):
    """Raised when a derivative is requested at a degenerate geometry."""


def rotation_z(psi: float, n_d: int) -> np.ndarray:
    """Rotation by angle psi about the z-axis (2x2 in 2D, 3x3 in 3D)."""
    c, s = np.cos(psi), np.sin(psi)
    if n_d == 2:
        return np.array([[c, s], [-s, c]])
    if n_d == 3:
        return np.array([[c, s, 0.0], [-s, c, 0.0], [0.0, 0.0, 1.0]])
    raise ValueError(f"n_d must be 2 or 3, got {n_d}")


def d_rotation_z(psi: float, n_d: int) -> np.ndarray:
    """Elementwise derivative of rotation_z with respect to psi."""
    c, s = np.cos(psi), np.sin(psi)
    if n_d == 2:
        return np.array([[-s, c], [-c, -s]])
    if n_d == 3:
        return np.array([[-s, c, 0.0], [-c, -s, 0.0], [0.0, 0.0, 0.0]])
    raise ValueError(f"n_d must be 2 or 3, got {n_d}")


# ---------------------------------------------------------------------------
# 2D point vortex
# ---------------------------------------------------------------------------


def induced_velocity_2d(x0, x1, gamma: float, sigma: float) -> np.ndarray:
    """Velocity induced at x0 by a regularized point vortex at x1."""
    r = np.asarray(x1, dtype=float) - np.asarray(x0, dtype=float)
    d2 = r @ r
    if d2 < DEGENERATE_EPS:
        return np.zeros(2)
    geom = np.array([-r[1], r[0]])
    circ = gamma / (TWO_PI * d2)
    core = -np.expm1(-d2 / sigma**2)
    return geom * (circ * core)


def d_induced_velocity_2d(x0, x1, gamma: float, sigma: float) -> KernelPartials2D:
    """Analytic partials of the 2D kernel; raises on coincident points."""
    x0 = np.asarray(x0, dtype=float)
    x1 = np.asarray(x1, dtype=float)
    r = x1 - x0
    d2 = r @ r
    if d2 < DEGENERATE_EPS:
        raise DegenerateKernelInput("coincident evaluation point and vortex")
    geom = np.array([-r[1], r[0]])
    circ = gamma / (TWO_PI * d2)
    core = -np.expm1(-d2 / sigma**2)
    exp_term = np.exp(-d2 / sigma**2)

    dgeom_dr = np.array([[0.0, -1.0], [1.0, 0.0]])
    dcirc_dr = -gamma / np.pi * r / d2**2
    dcore_dr = 2.0 * r / sigma**2 * exp_term

    du_dr = (
        dgeom_dr * (circ * core)
        + np.outer(geom, dcirc_dr) * core
        + np.outer(geom, dcore_dr) * circ
    )
    unit = geom * (core / (TWO_PI * d2))
    return KernelPartials2D(du_dx0=-du_dr, du_dx1=du_dr.copy(), du_dgamma=unit)


def _numpy_induced_2d_pairs(points, vortices, gammas, sigma: float) -> np.ndarray:
    """Per-pair induced velocities, shape (N, M, 2).

    points (N, 2) are evaluation locations, vortices (M, 2) carry
    circulations gammas (M,). Degenerate pairs contribute zero.
    """
    r = vortices[None, :, :] - points[:, None, :]  # (N, M, 2)
    d2 = np.einsum("nmd,nmd->nm", r, r)
    safe = np.where(d2 < DEGENERATE_EPS, 1.0, d2)
    fac = gammas[None, :] / (TWO_PI * safe) * (-np.expm1(-safe / sigma**2))
    fac = np.where(d2 < DEGENERATE_EPS, 0.0, fac)
    out = np.empty_like(r)
    out[..., 0] = -r[..., 1] * fac
    out[..., 1] = r[..., 0] * fac
    return out


def _numpy_induced_sum_2d(points, vortices, gammas, sigma: float) -> np.ndarray:
    """Total induced velocity at each point, shape (N, 2)."""
    return induced_2d_pairs(points, vortices, gammas, sigma).sum(axis=1)


def _numpy_kernel_partials_2d_pairs(points, vortices, gammas, sigma: float):
    """Vectorized analytic partials for all (point, vortex) pairs.

    Returns (du_dx1, unit, n_degenerate) where du_dx1 has shape
    (N, M, 2, 2), the derivative w.r.t. the evaluation point is its
    negative, and unit (N, M, 2) is the velocity at unit circulation.
    Degenerate pairs are zeroed and counted.
    """
    r = vortices[None, :, :] - points[:, None, :]
    d2 = np.einsum("nmd,nmd->nm", r, r)
    bad = d2 < DEGENERATE_EPS
    safe = np.where(bad, 1.0, d2)

    circ = gammas[None, :] / (TWO_PI * safe)
    core = -np.expm1(-safe / sigma**2)
    exp_term = np.exp(-safe / sigma**2)
    geom = np.stack([-r[..., 1], r[..., 0]], axis=-1)

    dcirc = -gammas[None, :, None] / np.pi * r / safe[..., None] ** 2
    dcore = 2.0 * r / sigma**2 * exp_term[..., None]

    dgeom = np.array([[0.0, -1.0], [1.0, 0.0]])
    du_dr = dgeom[None, None] * (circ * core)[..., None, None]
    du_dr += np.einsum("nmi,nmj->nmij", geom, dcirc * core[..., None])
    du_dr += np.einsum("nmi,nmj->nmij", geom, dcore * circ[..., None])
    du_dr[bad] = 0.0

    unit = geom * (core / (TWO_PI * safe))[..., None]
    unit[bad] = 0.0
    return du_dr, unit, int(bad.sum())


# ---------------------------------------------------------------------------
# 3D vortex filament
# ---------------------------------------------------------------------------


def _skew(v: np.ndarray) -> np.ndarray:
    return np.array(
        [[0.0, -v[2], v[1]], [v[2], 0.0, -v[0]], [-v[1], v[0], 0.0]]
    )


def induced_velocity_3d(x0, x1, x2, gamma: float, sigma: float) -> np.ndarray:
    """Velocity induced at x0 by a filament from x1 to x2."""
    x0 = np.asarray(x0, dtype=float)
    r0 = np.asarray(x2, dtype=float) - np.asarray(x1, dtype=float)
    r1 = np.asarray(x1, dtype=float) - x0
    r2 = np.asarray(x2, dtype=float) - x0
    cross = np.cross(r1, r2)
    c2 = cross @ cross
    l0sq = r0 @ r0
    if c2 < DEGENERATE_EPS or l0sq < DEGENERATE_EPS:
        return np.zeros(3)
    l1 = np.sqrt(r1 @ r1)
    l2 = np.sqrt(r2 @ r2)
    geom = gamma / FOUR_PI * cross / c2
    proj = r0 @ (r1 / l1 - r2 / l2)
    core = -np.expm1(-c2 / (sigma**2 * l0sq))
    return geom * (proj * core)


def d_induced_velocity_3d(x0, x1, x2, gamma: float, sigma: float) -> KernelPartials3D:
    """Analytic partials of the 3D kernel; raises on collinear geometry."""
    x0 = np.asarray(x0, dtype=float)
    x1 = np.asarray(x1, dtype=float)
    x2 = np.asarray(x2, dtype=float)
    r0 = x2 - x1
    r1 = x1 - x0
    r2 = x2 - x0
    cross = np.cross(r1, r2)
    c2 = cross @ cross
    l0sq = r0 @ r0
    if c2 < DEGENERATE_EPS or l0sq < DEGENERATE_EPS:
        raise DegenerateKernelInput("evaluation point collinear with filament")
    l1 = np.sqrt(r1 @ r1)
    l2 = np.sqrt(r2 @ r2)

    geom = gamma / FOUR_PI * cross / c2  # vector factor
    proj = r0 @ (r1 / l1 - r2 / l2)  # scalar factor
    g = c2 / (sigma**2 * l0sq)
    core = -np.expm1(-g)
    exp_term = np.exp(-g)

    sk1 = _skew(r1)
    sk2 = _skew(r2)
    # d(cross/||cross||^2)/dcross, then chain through dcross/dr1 = skew(r2)^T
    m = (c2 * np.eye(3) - 2.0 * np.outer(cross, cross)) / c2**2
    dgeom_dr1 = gamma / FOUR_PI * m @ sk2.T
    dgeom_dr2 = gamma / FOUR_PI * m @ sk1

    dproj_dr0 = r1 / l1 - r2 / l2
    dproj_dr1 = (l1**2 * r0 - (r0 @ r1) * r1) / l1**3
    dproj_dr2 = -(l2**2 * r0 - (r0 @ r2) * r2) / l2**3

    dcore_dr0 = -exp_term * (2.0 * c2 / (sigma**2 * l0sq**2)) * r0
    ccoef = exp_term * 2.0 / (sigma**2 * l0sq)
    dcore_dr1 = ccoef * (sk2 @ cross)
    dcore_dr2 = ccoef * (sk1.T @ cross)

    def du_dr(dg, dp, dc):
        return dg * (proj * core) + np.outer(geom, dp) * core + np.outer(geom, dc) * proj

    du_dr0 = du_dr(np.zeros((3, 3)), dproj_dr0, dcore_dr0)
    du_dr1 = du_dr(dgeom_dr1, dproj_dr1, dcore_dr1)
    du_dr2 = du_dr(dgeom_dr2, dproj_dr2, dcore_dr2)

    unit = cross / (FOUR_PI * c2) * (proj * core)
    return KernelPartials3D(
        du_dx0=-du_dr1 - du_dr2,
        du_dx1=du_dr1 - du_dr0,
        du_dx2=du_dr2 + du_dr0,
        du_dgamma=unit,
    )


def _numpy_induced_3d_pairs(points, start, end, gammas, sigma: float) -> np.ndarray:
    """Per-pair induced velocities for filaments, shape (N, M, 3)."""
    r1 = start[None, :, :] - points[:, None, :]
    r2 = end[None, :, :] - points[:, None, :]
    r0 = end - start  # (M, 3)
    cross = np.cross(r1, r2)
    c2 = np.einsum("nmd,nmd->nm", cross, cross)
    l0sq = np.einsum("md,md->m", r0, r0)
    bad = (c2 < DEGENERATE_EPS) | (l0sq[None, :] < DEGENERATE_EPS)
    c2s = np.where(bad, 1.0, c2)
    l0s = np.where(l0sq < DEGENERATE_EPS, 1.0, l0sq)

    l1 = np.sqrt(np.einsum("nmd,nmd->nm", r1, r1))
    l2 = np.sqrt(np.einsum("nmd,nmd->nm", r2, r2))
    l1 = np.where(l1 == 0.0, 1.0, l1)
    l2 = np.where(l2 == 0.0, 1.0, l2)
    proj = np.einsum("md,nmd->nm", r0, r1 / l1[..., None] - r2 / l2[..., None])
    core = -np.expm1(-c2s / (sigma**2 * l0s[None, :]))
    fac = gammas[None, :] / (FOUR_PI * c2s) * proj * core
    fac = np.where(bad, 0.0, fac)
    return cross * fac[..., None]


def _numpy_induced_sum_3d(points, start, end, gammas, sigma: float) -> np.ndarray:
    """Total induced velocity at each point, shape (N, 3)."""
    return _numpy_induced_3d_pairs(points, start, end, gammas, sigma).sum(axis=1)


def _skew_many(v: np.ndarray) -> np.ndarray:
    """Skew-symmetric matrices for an (..., 3) array, shape (..., 3, 3)."""
    out = np.zeros(v.shape + (3,))
    out[..., 0, 1] = -v[..., 2]
    out[..., 0, 2] = v[..., 1]
    out[..., 1, 0] = v[..., 2]
    out[..., 1, 2] = -v[..., 0]
    out[..., 2, 0] = -v[..., 1]
    out[..., 2, 1] = v[..., 0]
    return out


def _numpy_kernel_partials_3d_pairs(points, start, end, gammas, sigma: float):
    """Vectorized analytic partials for all (point, filament) pairs.

    Returns (du_dx0, du_dx1, du_dx2, unit, n_degenerate) with matrix
    blocks of shape (N, M, 3, 3) and unit (N, M, 3) the velocity at unit
    circulation. Degenerate pairs are zeroed and counted.
    """
    r1 = start[None, :, :] - points[:, None, :]
    r2 = end[None, :, :] - points[:, None, :]
    r0 = end - start
    cross = np.cross(r1, r2)
    c2 = np.einsum("nmd,nmd->nm", cross, cross)
    l0sq = np.einsum("md,md->m", r0, r0)
    bad = (c2 < DEGENERATE_EPS) | (l0sq[None, :] < DEGENERATE_EPS)
    c2s = np.where(bad, 1.0, c2)
    l0s = np.where(l0sq < DEGENERATE_EPS, 1.0, l0sq)[None, :]

    l1 = np.sqrt(np.einsum("nmd,nmd->nm", r1, r1))
    l2 = np.sqrt(np.einsum("nmd,nmd->nm", r2, r2))
    l1 = np.where(l1 == 0.0, 1.0, l1)
    l2 = np.where(l2 == 0.0, 1.0, l2)

    geom = gammas[None, :, None] / FOUR_PI * cross / c2s[..., None]
    proj = np.einsum("md,nmd->nm", r0, r1 / l1[..., None] - r2 / l2[..., None])
    g = c2s / (sigma**2 * l0s)
    core = -np.expm1(-g)
    exp_term = np.exp(-g)

    sk1 = _skew_many(r1)
    sk2 = _skew_many(r2)
    eye = np.eye(3)
    m = (
        c2s[..., None, None] * eye
        - 2.0 * np.einsum("nmi,nmj->nmij", cross, cross)
    ) / c2s[..., None, None] ** 2
    gfac = gammas[None, :, None, None] / FOUR_PI
    dgeom_dr1 = gfac * np.einsum("nmik,nmjk->nmij", m, sk2)  # m @ sk2^T
    dgeom_dr2 = gfac * np.einsum("nmik,nmkj->nmij", m, sk1)

    dproj_dr0 = r1 / l1[..., None] - r2 / l2[..., None]
    rdot1 = np.einsum("md,nmd->nm", r0, r1)
    rdot2 = np.einsum("md,nmd->nm", r0, r2)
    dproj_dr1 = (l1[..., None] ** 2 * r0[None, :, :] - rdot1[..., None] * r1) / l1[
        ..., None
    ] ** 3
    dproj_dr2 = -(l2[..., None] ** 2 * r0[None, :, :] - rdot2[..., None] * r2) / l2[
        ..., None
    ] ** 3

    dcore_dr0 = (
        -exp_term[..., None]
        * (2.0 * c2s / (sigma**2 * l0s**2))[..., None]
        * r0[None, :, :]
    )
    ccoef = (exp_term * 2.0 / (sigma**2 * l0s))[..., None]
    dcore_dr1 = ccoef * np.einsum("nmij,nmj->nmi", sk2, cross)
    dcore_dr2 = ccoef * np.einsum("nmji,nmj->nmi", sk1, cross)

    pc = (proj * core)[..., None, None]

    def assemble(dg, dp, dc):
        out = dg * pc
        out += np.einsum("nmi,nmj->nmij", geom, dp * core[..., None])
        out += np.einsum("nmi,nmj->nmij", geom, dc * proj[..., None])
        return out

    du_dr0 = assemble(np.zeros_like(dgeom_dr1), dproj_dr0, dcore_dr0)
    du_dr1 = assemble(dgeom_dr1, dproj_dr1, dcore_dr1)
    du_dr2 = assemble(dgeom_dr2, dproj_dr2, dcore_dr2)

    du_dx0 = -du_dr1 - du_dr2
    du_dx1 = du_dr1 - du_dr0
    du_dx2 = du_dr2 + du_dr0
    du_dx0[bad] = 0.0
    du_dx1[bad] = 0.0
    du_dx2[bad] = 0.0

    unit = cross / (FOUR_PI * c2s[..., None]) * (proj * core)[..., None]
    unit[bad] = 0.0
    return du_dx0, du_dx1, du_dx2, unit, int(bad.sum())


# ---------------------------------------------------------------------------
# Dispatch: compiled pairwise loops when available, numpy otherwise
# ---------------------------------------------------------------------------

from . import _fast  # noqa: E402

induced_2d_pairs = _numpy_induced_2d_pairs
induced_3d_pairs = _numpy_induced_3d_pairs

if _fast.HAVE_NUMBA:

    def induced_sum_2d(points, vortices, gammas, sigma):
        return _fast.induced_sum_2d(
            np.ascontiguousarray(points, dtype=float),
            np.ascontiguousarray(vortices, dtype=float),
            np.ascontiguousarray(gammas, dtype=float),
            float(sigma), DEGENERATE_EPS,
        )

    def induced_sum_3d(points, start, end, gammas, sigma):
        return _fast.induced_sum_3d(
            np.ascontiguousarray(points, dtype=float),
            np.ascontiguousarray(start, dtype=float),
            np.ascontiguousarray(end, dtype=float),
            np.ascontiguousarray(gammas, dtype=float),
            float(sigma), DEGENERATE_EPS,
        )

    def kernel_partials_2d_pairs(points, vortices, gammas, sigma):
        du_dr, unit, ndeg = _fast.kernel_partials_2d_pairs(
            np.ascontiguousarray(points, dtype=float),
            np.ascontiguousarray(vortices, dtype=float),
            np.ascontiguousarray(gammas, dtype=float),
            float(sigma), DEGENERATE_EPS,
        )
        return du_dr, unit, int(ndeg)

    def kernel_partials_3d_pairs(points, start, end, gammas, sigma):
        d0, d1, d2, unit, ndeg = _fast.kernel_partials_3d_pairs(
            np.ascontiguousarray(points, dtype=float),
            np.ascontiguousarray(start, dtype=float),
            np.ascontiguousarray(end, dtype=float),
            np.ascontiguousarray(gammas, dtype=float),
            float(sigma), DEGENERATE_EPS,
        )
        return d0, d1, d2, unit, int(ndeg)

else:  # pragma: no cover - exercised only without numba
    induced_sum_2d = _numpy_induced_sum_2d
    induced_sum_3d = _numpy_induced_sum_3d
    kernel_partials_2d_pairs = _numpy_kernel_partials_2d_pairs
    kernel_partials_3d_pairs = _numpy_kernel_partials_3d_pairs
