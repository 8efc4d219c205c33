import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fvwake import kernels

RNG = np.random.default_rng(2024)

finite = st.floats(-3.0, 3.0, allow_nan=False, allow_infinity=False)


def fd_kernel_2d(x0, x1, gamma, sigma, which, eps=1e-7):
    grad = np.zeros((2, 2))
    for j in range(2):
        args = [np.array(x0, float), np.array(x1, float)]
        args[which][j] += eps
        up = kernels.induced_velocity_2d(*args, gamma, sigma)
        args[which][j] -= 2 * eps
        dn = kernels.induced_velocity_2d(*args, gamma, sigma)
        grad[:, j] = (up - dn) / (2 * eps)
    return grad


def fd_kernel_3d(x0, x1, x2, gamma, sigma, which, eps=1e-7):
    grad = np.zeros((3, 3))
    for j in range(3):
        args = [np.array(x0, float), np.array(x1, float), np.array(x2, float)]
        args[which][j] += eps
        up = kernels.induced_velocity_3d(*args, gamma, sigma)
        args[which][j] -= 2 * eps
        dn = kernels.induced_velocity_3d(*args, gamma, sigma)
        grad[:, j] = (up - dn) / (2 * eps)
    return grad


class TestRotation:
    def test_identity_at_zero(self):
        assert np.allclose(kernels.rotation_z(0.0, 2), np.eye(2))
        assert np.allclose(kernels.rotation_z(0.0, 3), np.eye(3))

    def test_quarter_turn_2d(self):
        expected = np.array([[0.0, 1.0], [-1.0, 0.0]])
        assert np.allclose(kernels.rotation_z(np.pi / 2, 2), expected, atol=1e-12)

    def test_3d_leaves_z_alone(self):
        r = kernels.rotation_z(0.7, 3)
        assert r[2, 2] == 1.0
        assert np.all(r[2, :2] == 0.0) and np.all(r[:2, 2] == 0.0)

    @pytest.mark.parametrize("n_d", [2, 3])
    def test_derivative_matches_fd(self, n_d):
        eps = 1e-7
        for psi in [-1.2, 0.0, 0.4, 1.5]:
            fd = (
                kernels.rotation_z(psi + eps, n_d) - kernels.rotation_z(psi - eps, n_d)
            ) / (2 * eps)
            assert np.allclose(kernels.d_rotation_z(psi, n_d), fd, atol=1e-8)

    def test_bad_dimension(self):
        with pytest.raises(ValueError):
            kernels.rotation_z(0.0, 4)


class TestKernel2D:
    def test_unit_distance_example(self):
        u = kernels.induced_velocity_2d((1.0, 0.0), (0.0, 0.0), 2 * np.pi, 0.1)
        assert np.allclose(u, [0.0, -1.0], atol=1e-12)

    def test_coincident_returns_zero(self):
        u = kernels.induced_velocity_2d((0.3, -0.2), (0.3, -0.2), 5.0, 0.1)
        assert np.all(u == 0.0)

    def test_tangential_and_scalar_oracle(self):
        x0, x1, gamma, sigma = np.zeros(2), np.array([0.0, 0.5]), 0.1, 0.1
        u = kernels.induced_velocity_2d(x0, x1, gamma, sigma)
        r = x1 - x0
        assert u @ r == 0.0
        d2 = r @ r
        expected = abs(gamma) / (2 * np.pi * d2) * (1 - np.exp(-d2 / sigma**2)) * np.sqrt(d2)
        assert np.isclose(np.linalg.norm(u), expected, rtol=1e-12)

    def test_core_regularization(self):
        # speed decays to zero approaching the vortex, core factor in [0, 1)
        sigma = 0.1
        dists = np.array([0.2, 0.1, 0.05, 0.01, 0.001])
        speeds = [
            np.linalg.norm(kernels.induced_velocity_2d((d, 0.0), (0.0, 0.0), 1.0, sigma))
            for d in dists
        ]
        assert speeds[2] > speeds[3] > speeds[4]
        factors = 1.0 - np.exp(-(dists**2) / sigma**2)
        assert np.all((factors >= 0.0) & (factors < 1.0))

    @given(finite, finite, finite, finite, st.floats(-2, 2), st.floats(0.5, 3))
    @settings(max_examples=60, deadline=None)
    def test_gamma_linearity(self, ax, ay, bx, by, gamma, lam):
        x0, x1 = np.array([ax, ay]), np.array([bx, by])
        u1 = kernels.induced_velocity_2d(x0, x1, gamma, 0.1)
        u2 = kernels.induced_velocity_2d(x0, x1, lam * gamma, 0.1)
        assert np.allclose(u2, lam * u1, rtol=1e-12, atol=1e-14)

    def test_partials_match_fd_bulk(self):
        worst = 0.0
        count = 0
        while count < 1000:
            x0 = RNG.normal(size=2)
            x1 = RNG.normal(size=2)
            if np.linalg.norm(x1 - x0) < 0.05:
                continue
            count += 1
            gamma = RNG.normal()
            p = kernels.d_induced_velocity_2d(x0, x1, gamma, 0.1)
            fd0 = fd_kernel_2d(x0, x1, gamma, 0.1, 0)
            fd1 = fd_kernel_2d(x0, x1, gamma, 0.1, 1)
            scale = max(np.abs(fd0).max(), np.abs(fd1).max(), 1e-9)
            worst = max(
                worst,
                np.abs(p.du_dx0 - fd0).max() / scale,
                np.abs(p.du_dx1 - fd1).max() / scale,
            )
        assert worst <= 1e-6

    def test_dx0_is_minus_dx1(self):
        p = kernels.d_induced_velocity_2d((0.1, 0.2), (-0.4, 0.9), 1.3, 0.1)
        assert np.array_equal(p.du_dx0, -p.du_dx1)

    def test_dgamma_is_unit_kernel(self):
        x0, x1 = (0.1, -0.3), (0.7, 0.4)
        p = kernels.d_induced_velocity_2d(x0, x1, 2.0, 0.1)
        assert np.allclose(p.du_dgamma, kernels.induced_velocity_2d(x0, x1, 1.0, 0.1))

    def test_degenerate_raises(self):
        with pytest.raises(kernels.DegenerateKernelInput):
            kernels.d_induced_velocity_2d((1.0, 1.0), (1.0, 1.0), 1.0, 0.1)


class TestKernel3D:
    def test_finite_segment_oracle(self):
        # straight segment of length 2 at perpendicular distance 1:
        # |u| = gamma/(4 pi d) (cos t1 - cos t2) = sqrt(2) for gamma = 4 pi
        u = kernels.induced_velocity_3d(
            (1, 0, 0), (0, -1, 0), (0, 1, 0), 4 * np.pi, 1e-6
        )
        assert np.allclose(u, [0.0, 0.0, np.sqrt(2.0)], atol=1e-9)

    def test_collinear_returns_zero(self):
        u = kernels.induced_velocity_3d((0, 0.5, 0), (0, -1, 0), (0, 1, 0), 3.0, 0.1)
        assert np.all(u == 0.0)

    def test_zero_gamma(self):
        u = kernels.induced_velocity_3d((1, 0, 0), (0, -1, 0), (0, 1, 0), 0.0, 0.1)
        assert np.all(u == 0.0)

    @given(st.integers(0, 10_000))
    @settings(max_examples=40, deadline=None)
    def test_orthogonality(self, seed):
        rng = np.random.default_rng(seed)
        x0, x1, x2 = rng.normal(size=(3, 3))
        if np.linalg.norm(np.cross(x1 - x0, x2 - x0)) < 1e-3:
            return
        u = kernels.induced_velocity_3d(x0, x1, x2, 1.7, 0.16)
        assert abs(u @ (x1 - x0)) <= 1e-12 * max(1.0, np.linalg.norm(u))
        assert abs(u @ (x2 - x0)) <= 1e-12 * max(1.0, np.linalg.norm(u))

    def test_partials_match_fd_bulk(self):
        worst = 0.0
        count = 0
        while count < 300:
            x0, x1, x2 = RNG.normal(size=(3, 3))
            c = np.cross(x1 - x0, x2 - x0)
            if c @ c < 1e-3 or np.linalg.norm(x2 - x1) < 0.05:
                continue
            count += 1
            gamma = RNG.normal()
            p = kernels.d_induced_velocity_3d(x0, x1, x2, gamma, 0.16)
            blocks = (p.du_dx0, p.du_dx1, p.du_dx2)
            fds = [fd_kernel_3d(x0, x1, x2, gamma, 0.16, w) for w in range(3)]
            scale = max(max(np.abs(f).max() for f in fds), 1e-9)
            worst = max(
                worst, max(np.abs(b - f).max() / scale for b, f in zip(blocks, fds))
            )
        assert worst <= 1e-6

    def test_translation_invariance(self):
        p = kernels.d_induced_velocity_3d(
            (0.3, 0.1, -0.2), (1.0, 0.0, 0.5), (0.8, 1.1, 0.2), 2.0, 0.16
        )
        total = p.du_dx0 + p.du_dx1 + p.du_dx2
        assert np.abs(total).max() <= 1e-12

    def test_gamma_linearity_of_partials(self):
        args = ((0.3, 0.1, -0.2), (1.0, 0.0, 0.5), (0.8, 1.1, 0.2))
        p1 = kernels.d_induced_velocity_3d(*args, 1.0, 0.16)
        p3 = kernels.d_induced_velocity_3d(*args, 3.0, 0.16)
        assert np.allclose(p3.du_dx0, 3 * p1.du_dx0, rtol=1e-12)
        assert np.allclose(p3.du_dx1, 3 * p1.du_dx1, rtol=1e-12)
        assert np.allclose(p3.du_dx2, 3 * p1.du_dx2, rtol=1e-12)

    def test_degenerate_raises(self):
        with pytest.raises(kernels.DegenerateKernelInput):
            kernels.d_induced_velocity_3d(
                (0, 0, 0), (1, 0, 0), (2, 0, 0), 1.0, 0.16
            )

    @given(st.integers(0, 10_000), st.floats(-2, 2), st.floats(0.2, 3))
    @settings(max_examples=40, deadline=None)
    def test_gamma_linearity(self, seed, gamma, lam):
        rng = np.random.default_rng(seed)
        x0, x1, x2 = rng.normal(size=(3, 3))
        u1 = kernels.induced_velocity_3d(x0, x1, x2, gamma, 0.16)
        u2 = kernels.induced_velocity_3d(x0, x1, x2, lam * gamma, 0.16)
        assert np.allclose(u2, lam * u1, rtol=1e-12, atol=1e-14)


class TestVectorizedAgreement:
    """The batched (compiled) paths must reproduce the scalar kernels."""

    def test_2d_sum_and_partials(self):
        pts = RNG.normal(size=(15, 2))
        vort = RNG.normal(size=(11, 2))
        gam = RNG.normal(size=11)
        total = kernels.induced_sum_2d(pts, vort, gam, 0.1)
        ref = np.array(
            [
                sum(
                    kernels.induced_velocity_2d(p, vort[j], gam[j], 0.1)
                    for j in range(11)
                )
                for p in pts
            ]
        )
        assert np.allclose(total, ref, atol=1e-13)
        du_dr, unit, ndeg = kernels.kernel_partials_2d_pairs(pts, vort, gam, 0.1)
        assert ndeg == 0
        for i in (0, 7):
            for j in (0, 5):
                p = kernels.d_induced_velocity_2d(pts[i], vort[j], gam[j], 0.1)
                assert np.allclose(du_dr[i, j], p.du_dx1, atol=1e-13)
                assert np.allclose(unit[i, j], p.du_dgamma, atol=1e-13)

    def test_3d_sum_and_partials(self):
        pts = RNG.normal(size=(10, 3))
        a = RNG.normal(size=(8, 3))
        b = a + RNG.normal(size=(8, 3))
        gam = RNG.normal(size=8)
        total = kernels.induced_sum_3d(pts, a, b, gam, 0.16)
        ref = np.array(
            [
                sum(
                    kernels.induced_velocity_3d(p, a[j], b[j], gam[j], 0.16)
                    for j in range(8)
                )
                for p in pts
            ]
        )
        assert np.allclose(total, ref, atol=1e-13)
        d0, d1, d2, unit, ndeg = kernels.kernel_partials_3d_pairs(pts, a, b, gam, 0.16)
        for i in (0, 4):
            for j in (0, 3):
                p = kernels.d_induced_velocity_3d(pts[i], a[j], b[j], gam[j], 0.16)
                assert np.allclose(d0[i, j], p.du_dx0, atol=1e-13)
                assert np.allclose(d1[i, j], p.du_dx1, atol=1e-13)
                assert np.allclose(d2[i, j], p.du_dx2, atol=1e-13)
                assert np.allclose(unit[i, j], p.du_dgamma, atol=1e-13)

    def test_degenerate_pairs_counted_and_zeroed(self):
        pts = np.array([[0.0, 0.0], [1.0, 0.0]])
        vort = np.array([[0.0, 0.0], [0.0, 1.0]])
        gam = np.array([1.0, 1.0])
        du_dr, unit, ndeg = kernels.kernel_partials_2d_pairs(pts, vort, gam, 0.1)
        assert ndeg == 1
        assert np.all(du_dr[0, 0] == 0.0) and np.all(unit[0, 0] == 0.0)
