"""Actuator-disc rotor relations: loading coefficients, disc sampling,
ring geometry and circulation shedding.

Angles are radians, lengths rotor diameters, speeds inflow units. The
disc radius is 0.5 throughout.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np

from .kernels import rotation_z, d_rotation_z

RADIUS = 0.5
DEFAULT_CT1 = 2.3


def transition_induction(ct1: float = DEFAULT_CT1) -> float:
    """Induction at which the thrust curve switches to the linear branch."""
    return 1.0 - 0.5 * np.sqrt(ct1)


def thrust_coefficient(a: float, ct1: float = DEFAULT_CT1) -> float:
    """Local thrust coefficient: momentum theory below the transition
    induction, linear high-loading correction above it."""
    if a >= 1.0:
        raise ValueError(f"induction a={a} outside domain a < 1")
    if a <= transition_induction(ct1):
        return 4.0 * a / (1.0 - a)
    return (ct1 - 4.0 * (np.sqrt(ct1) - 1.0) * (1.0 - a)) / (1.0 - a) ** 2


def d_thrust_coefficient(a: float, ct1: float = DEFAULT_CT1) -> float:
    if a >= 1.0:
        raise ValueError(f"induction a={a} outside domain a < 1")
    if a <= transition_induction(ct1):
        return 4.0 / (1.0 - a) ** 2
    return 2.0 * ct1 / (1.0 - a) ** 3 - 4.0 * (np.sqrt(ct1) - 1.0) / (1.0 - a) ** 2


def power_coefficient(a: float) -> float:
    """Local power coefficient 4a/(1-a), referenced to rotor-plane speed."""
    if a >= 1.0:
        raise ValueError(f"induction a={a} outside domain a < 1")
    return 4.0 * a / (1.0 - a)


def d_power_coefficient(a: float) -> float:
    if a >= 1.0:
        raise ValueError(f"induction a={a} outside domain a < 1")
    return 4.0 / (1.0 - a) ** 2


def normal_vector(psi: float, n_d: int) -> np.ndarray:
    """Downstream-pointing rotor normal, the rotated x-axis unit vector."""
    e_x = np.zeros(n_d)
    e_x[0] = 1.0
    return rotation_z(psi, n_d) @ e_x


def d_normal_vector(psi: float, n_d: int) -> np.ndarray:
    e_x = np.zeros(n_d)
    e_x[0] = 1.0
    return d_rotation_z(psi, n_d) @ e_x


def circle_points(m: int):
    """Unit-circle (cos, sin) samples at angles 2*pi*i/m for i = 0..m-1.

    For even m the table is built so the point set maps onto itself
    bitwise under cos -> -cos (mirror through the vertical axis); this
    keeps yaw-mirrored simulations exactly symmetric in floating point.
    """
    c = np.empty(m)
    s = np.empty(m)
    for i in range(m):
        if i == 0:
            c[i], s[i] = 1.0, 0.0
        elif 4 * i == m:
            c[i], s[i] = 0.0, 1.0
        elif 2 * i == m:
            c[i], s[i] = -1.0, 0.0
        elif 4 * i == 3 * m:
            c[i], s[i] = 0.0, -1.0
        elif 4 * i < m or 4 * i > 3 * m:
            th = 2.0 * np.pi * i / m
            c[i], s[i] = np.cos(th), np.sin(th)
        elif m % 2 == 0:
            j = (m // 2 - i) % m
            th = 2.0 * np.pi * j / m
            c[i], s[i] = -np.cos(th), np.sin(th)
        else:
            th = 2.0 * np.pi * i / m
            c[i], s[i] = np.cos(th), np.sin(th)
    return c, s


@lru_cache(maxsize=32)
def _ring_base_points_cached(n_d: int, n_e: int):
    if n_d == 2:
        pts = np.array([[0.0, RADIUS], [0.0, -RADIUS]])
    else:
        c, s = circle_points(n_e)
        idx = np.arange(n_e + 1) % n_e
        pts = np.zeros((n_e + 1, 3))
        pts[:, 1] = RADIUS * c[idx]
        pts[:, 2] = RADIUS * s[idx]
    pts.setflags(write=False)
    return pts


def ring_base_points(n_d: int, n_e: int) -> np.ndarray:
    """Unrotated new-ring point offsets from the rotor center, (n_p, n_d).

    2D sheds the two rotor-edge points; 3D distributes n_e + 1 points on
    the rotor circle with the last point closing the ring exactly onto
    the first.
    """
    return _ring_base_points_cached(n_d, n_e)


def new_ring_positions(psi: float, n_d: int, n_e: int, center) -> np.ndarray:
    """Rotor-edge positions of a freshly shed ring, yawed and translated."""
    base = ring_base_points(n_d, n_e)
    return base @ rotation_z(psi, n_d).T + np.asarray(center, dtype=float)


def _annulus_layout(n_u: int):
    """Equal-area cell layout on the unit disc: (radius, count) per ring
    plus a flag for one center point. Counts are kept even so the layout
    is mirror-symmetric."""
    if n_u == 1:
        return [], True
    pts = n_u
    center = False
    if pts % 2 == 1:
        center = True
        pts -= 1
    q = max(1, int(round(np.sqrt(pts / 4.0))))
    ideal = pts * (2.0 * np.arange(q) + 1.0) / q**2
    counts = 2 * np.maximum(1, np.round(ideal / 2.0).astype(int))
    j = q - 1
    while counts.sum() != pts:
        delta = 2 if counts.sum() < pts else -2
        if counts[j] + delta >= 2:
            counts[j] += delta
        j = (j - 1) % q
    # area-median radius of each equal-width annulus
    edges = np.arange(q + 1) / q
    radii = np.sqrt(0.5 * (edges[:-1] ** 2 + edges[1:] ** 2))
    return list(zip(radii, counts)), center


@lru_cache(maxsize=32)
def _disc_base_cached(n_u: int, n_d: int):
    if n_u < 1:
        raise ValueError("n_u must be >= 1")
    if n_d == 2:
        offs = np.empty(n_u)
        for i in range((n_u + 1) // 2):
            offs[i] = (i + 0.5) / n_u - 0.5
            offs[n_u - 1 - i] = -offs[i]
        if n_u % 2 == 1:
            offs[n_u // 2] = 0.0
        base = np.zeros((n_u, 2))
        base[:, 1] = 2.0 * RADIUS * offs
    else:
        rings, add_center = _annulus_layout(n_u)
        rows = []
        if add_center:
            rows.append(np.zeros((1, 3)))
        for radius, count in rings:
            c, s = circle_points(int(count))
            pts = np.zeros((int(count), 3))
            pts[:, 1] = RADIUS * radius * c
            pts[:, 2] = RADIUS * radius * s
            rows.append(pts)
        base = np.vstack(rows)
    base.setflags(write=False)
    return base


def disc_points(n_u: int, psi: float, center, n_d: int) -> np.ndarray:
    """Velocity sampling points covering the rotor, (n_u, n_d).

    2D: cell-centered samples on the rotor line segment. 3D: equal-area
    annulus/azimuth partition of the disc. Both layouts are rotated by
    the yaw angle and translated to the rotor center; both average to
    the center by symmetry.
    """
    center = np.asarray(center, dtype=float)
    base = _disc_base_cached(n_u, n_d)
    return base @ rotation_z(psi, n_d).T + center


def d_disc_points(n_u: int, psi: float, n_d: int) -> np.ndarray:
    """Derivative of the disc sample positions with respect to yaw."""
    return _disc_base_cached(n_u, n_d) @ d_rotation_z(psi, n_d).T


def shed_circulation(a: float, psi: float, u_r, h: float, ct1: float) -> float:
    """Circulation placed on every element of the newest ring."""
    proj = float(np.asarray(u_r) @ normal_vector(psi, len(u_r)))
    return thrust_coefficient(a, ct1) * 0.5 * proj**2 * h


def turbine_power(u_r, a: float, psi: float, is_virtual: bool, rotor_area: float) -> float:
    """Turbine power from the disc-averaged velocity.

    Virtual turbines (evaluated in the flow without shedding) see their
    disc velocity reduced by the induction factor first.
    """
    u_eff = (1.0 - a) * np.asarray(u_r) if is_virtual else np.asarray(u_r)
    proj = float(u_eff @ normal_vector(psi, len(u_eff)))
    return 0.5 * power_coefficient(a) * rotor_area * proj**3
