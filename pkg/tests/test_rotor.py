import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fvwake import rotor


class TestThrustCoefficient:
    def test_zero_at_zero(self):
        assert rotor.thrust_coefficient(0.0) == 0.0

    def test_branches_continuous_at_transition(self):
        a_t = rotor.transition_induction()
        assert np.isclose(a_t, 0.24171, atol=5e-5)
        low = 4.0 * a_t / (1.0 - a_t)
        high = (2.3 - 4.0 * (np.sqrt(2.3) - 1.0) * (1.0 - a_t)) / (1.0 - a_t) ** 2
        assert np.isclose(low, high, rtol=1e-12)
        assert np.isclose(low, 8.0 / np.sqrt(2.3) - 4.0, rtol=1e-12)
        assert np.isclose(rotor.thrust_coefficient(a_t), 1.275, atol=1e-3)

    def test_value_at_030(self):
        # high-loading branch; the steady under-induction operating point
        assert np.isclose(rotor.thrust_coefficient(0.30), 1.742, atol=5e-4)

    def test_domain_error(self):
        with pytest.raises(ValueError):
            rotor.thrust_coefficient(1.0)
        with pytest.raises(ValueError):
            rotor.d_thrust_coefficient(1.2)

    @given(st.floats(0.0, 0.9))
    @settings(max_examples=60, deadline=None)
    def test_derivative_matches_fd(self, a):
        eps = 1e-7
        a_t = rotor.transition_induction()
        if abs(a - a_t) < 10 * eps:
            return  # derivative is continuous but the branches differ in form
        fd = (
            rotor.thrust_coefficient(a + eps) - rotor.thrust_coefficient(a - eps)
        ) / (2 * eps)
        assert np.isclose(rotor.d_thrust_coefficient(a), fd, rtol=1e-6)

    def test_derivative_continuous_at_transition(self):
        a_t = rotor.transition_induction()
        lo = rotor.d_thrust_coefficient(a_t - 1e-12)
        hi = rotor.d_thrust_coefficient(a_t + 1e-12)
        assert np.isclose(lo, hi, rtol=1e-9)


class TestPowerCoefficient:
    def test_examples(self):
        assert rotor.power_coefficient(0.0) == 0.0
        assert np.isclose(rotor.power_coefficient(1.0 / 3.0), 2.0, rtol=1e-12)
        assert np.isclose(rotor.power_coefficient(0.27), 4 * 0.27 / 0.73, rtol=1e-12)

    def test_domain_error(self):
        with pytest.raises(ValueError):
            rotor.power_coefficient(1.0)

    @given(st.floats(0.0, 0.9))
    @settings(max_examples=40, deadline=None)
    def test_derivative_matches_fd(self, a):
        eps = 1e-7
        fd = (rotor.power_coefficient(a + eps) - rotor.power_coefficient(a - eps)) / (
            2 * eps
        )
        assert np.isclose(rotor.d_power_coefficient(a), fd, rtol=1e-6)


class TestRingGeometry:
    def test_2d_unrotated_edges(self):
        pts = rotor.new_ring_positions(0.0, 2, 2, (0.0, 0.0))
        assert np.allclose(pts, [[0.0, 0.5], [0.0, -0.5]])

    def test_2d_quarter_turn(self):
        pts = rotor.new_ring_positions(np.pi / 2, 2, 2, (0.0, 0.0))
        assert np.allclose(pts, [[0.5, 0.0], [-0.5, 0.0]], atol=1e-12)

    def test_3d_ring_closure_and_radius(self):
        pts = rotor.new_ring_positions(0.0, 3, 16, (0.0, 0.0, 0.0))
        assert pts.shape == (17, 3)
        assert np.array_equal(pts[0], pts[-1])
        radii = np.linalg.norm(pts[:, 1:], axis=1)
        assert np.allclose(radii, 0.5, atol=1e-12)
        assert np.all(pts[:, 0] == 0.0)

    def test_3d_center_offset(self):
        center = np.array([2.0, -1.0, 0.5])
        pts = rotor.new_ring_positions(0.3, 3, 8, center)
        assert np.allclose(pts.mean(axis=0), center + 0.0, atol=0.2)

    def test_mirror_symmetric_point_set(self):
        # the circle table is exactly closed under y -> -y for even counts
        c, s = rotor.circle_points(16)
        for i in range(16):
            j = (8 - i) % 16
            assert c[j] == -c[i]
            assert s[j] == s[i]


class TestDiscPoints:
    @pytest.mark.parametrize("n_d", [2, 3])
    def test_single_point_is_center(self, n_d):
        center = np.zeros(n_d)
        center[0] = 3.0
        pts = rotor.disc_points(1, 0.4, center, n_d)
        assert pts.shape == (1, n_d)
        assert np.allclose(pts[0], center, atol=1e-14)

    @pytest.mark.parametrize("n_d,n_u", [(2, 9), (3, 64), (3, 37)])
    def test_within_radius(self, n_d, n_u):
        center = np.zeros(n_d)
        for psi in (0.0, 0.5, -1.1):
            pts = rotor.disc_points(n_u, psi, center, n_d)
            assert pts.shape[0] == n_u
            assert np.all(np.linalg.norm(pts, axis=1) <= 0.5 + 1e-12)

    @pytest.mark.parametrize("n_d,n_u", [(2, 9), (3, 64)])
    def test_mean_is_center(self, n_d, n_u):
        center = np.zeros(n_d)
        center[0] = 5.0
        pts = rotor.disc_points(n_u, 0.7, center, n_d)
        assert np.allclose(pts.mean(axis=0), center, atol=1e-10)

    def test_rotation_derivative_fd(self):
        eps = 1e-7
        for n_d, n_u in ((2, 9), (3, 64)):
            psi = 0.35
            fd = (
                rotor.disc_points(n_u, psi + eps, np.zeros(n_d), n_d)
                - rotor.disc_points(n_u, psi - eps, np.zeros(n_d), n_d)
            ) / (2 * eps)
            assert np.allclose(rotor.d_disc_points(n_u, psi, n_d), fd, atol=1e-8)

    def test_invalid_count(self):
        with pytest.raises(ValueError):
            rotor.disc_points(0, 0.0, np.zeros(2), 2)


class TestSheddingAndPower:
    def test_zero_induction_sheds_nothing(self):
        assert rotor.shed_circulation(0.0, 0.0, np.array([1.0, 0.0]), 0.2, 2.3) == 0.0

    def test_high_branch_example(self):
        # a = 0.33 lies on the high-loading branch
        gamma = rotor.shed_circulation(0.33, 0.0, np.array([0.67, 0.0]), 0.2, 2.3)
        assert np.isclose(gamma, 0.09156, atol=2e-5)

    def test_orthogonal_rotor_sheds_nothing(self):
        gamma = rotor.shed_circulation(0.33, np.pi / 2, np.array([1.0, 0.0]), 0.2, 2.3)
        assert abs(gamma) < 1e-30

    def test_betz_point_power(self):
        p = rotor.turbine_power(
            np.array([2.0 / 3.0, 0.0, 0.0]), 1.0 / 3.0, 0.0, False, np.pi / 4
        )
        assert np.isclose(p, 0.23271, atol=1e-5)

    def test_zero_induction_zero_power(self):
        p = rotor.turbine_power(np.array([1.0, 0.0]), 0.0, 0.0, False, 1.0)
        assert p == 0.0

    def test_orthogonal_rotor_zero_power(self):
        p = rotor.turbine_power(np.array([1.0, 0.0]), 0.33, np.pi / 2, False, 1.0)
        assert abs(p) < 1e-45

    def test_virtual_scaling(self):
        u = np.array([1.0, 0.0])
        p_virtual = rotor.turbine_power(u, 0.33, 0.0, True, 1.0)
        p_scaled = rotor.turbine_power((1 - 0.33) * u, 0.33, 0.0, False, 1.0)
        assert np.isclose(p_virtual, p_scaled, rtol=1e-12)
