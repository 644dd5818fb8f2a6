import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.spatial.transform import Rotation

from isl_fso.constellation import (LinkSelection, LinkType, iridium_spec, satellite_eci, scenario_links, starlink_spec)
from isl_fso.orbital_geometry import (DEFAULT_CONSTANTS, BracketError, OrbitState,
                                      arrival_time_bracket, cartesian_to_spherical,
                                      circular_angular_rate, count_residual_roots, displacement,
                                      link_displacement, receiver_frame_rotation,
                                      solve_arrival_time, spherical_to_cartesian,
                                      to_receiver_centric, wavefront_residual)
from isl_fso.validation import random_geometry

K = DEFAULT_CONSTANTS
C = K.light_speed_m_s
IRIDIUM_R = K.earth_radius_m + 781e3


def planar_arrival_oracle(r, delta, omega):
    """Arrival time for tx at angle 0 and rx at angle delta on one circle.

    Dense scan of |rx(t) - tx| - c t followed by Newton steps with a
    numerical derivative; shares nothing with the library solver.
    """
    def g(t):
        ang = delta + omega * t
        return math.hypot(r * math.cos(ang) - r, r * math.sin(ang)) - C * t

    ts = np.linspace(0, 0.1, 100_001)
    vals = np.array([g(t) for t in ts[::100]])
    i = int(np.argmax(vals < 0))
    t = ts[100 * i]
    for _ in range(20):
        h = 1e-9
        t -= g(t) / ((g(t + h) - g(t - h)) / (2 * h))
    return t


class TestAngularRate:
    def test_iridium_equatorial(self):
        assert circular_angular_rate(7.159137e6) == pytest.approx(1.042e-3, abs=5e-7)
        assert circular_angular_rate(7.159137e6) == pytest.approx(1.0422643371094107e-3, rel=1e-14)

    def test_kepler_scaling(self):
        assert circular_angular_rate(4 * 7e6) == pytest.approx(circular_angular_rate(7e6) / 8, rel=1e-15)

    def test_unit_rate(self):
        assert circular_angular_rate(K.mu_earth_m3_s2 ** (1 / 3)) == pytest.approx(1.0, rel=1e-15)


class TestSpherical:
    def test_pole(self):
        assert np.allclose(spherical_to_cartesian(OrbitState(7e6, 0.0, 1.3, 0.0)), [0, 0, 7e6])

    def test_equator(self):
        assert np.allclose(spherical_to_cartesian(OrbitState(7e6, math.pi / 2, 0.0, 0.0)),
                           [7e6, 0, 0], atol=1e-9)

    @given(st.floats(6.5e6, 9e6), st.floats(0, math.pi), st.floats(-math.pi, math.pi),
           st.floats(-1, 1))
    def test_on_sphere_and_round_trip(self, r, theta, psi, dt):
        state = OrbitState(r, theta, psi, 1e-3)
        pos = spherical_to_cartesian(state, dt)
        assert np.linalg.norm(pos) == pytest.approx(r, rel=1e-14)
        r2, th2, _ = cartesian_to_spherical(spherical_to_cartesian(state))
        assert r2 == pytest.approx(r, rel=1e-14)
        assert th2 == pytest.approx(theta, abs=1e-7)


class TestReceiverFrame:
    def test_identity_when_already_aligned(self):
        rx = spherical_to_cartesian(OrbitState(7e6, 1.0, 0.0, 0.0))
        assert np.allclose(receiver_frame_rotation(rx, [0, 1, 0]), np.eye(3), atol=1e-12)

    def test_isometry_and_polar_motion(self):
        rng = np.random.default_rng(5)
        for _ in range(200):
            n = rng.normal(size=3)
            n /= np.linalg.norm(n)
            rx = np.cross(n, rng.normal(size=3))
            rx *= 7e6 / np.linalg.norm(rx)
            tx = rng.normal(size=3) * 4e6
            tx_s, rx_s = to_receiver_centric(tx, rx, n)
            tx_c, rx_c = spherical_to_cartesian(tx_s), spherical_to_cartesian(rx_s)
            assert np.linalg.norm(tx_c - rx_c) == pytest.approx(np.linalg.norm(tx - rx), rel=1e-9)
            assert rx_s.azimuth_rad == 0.0
            # ECI motion about n, mapped into the frame, stays in the x-z plane and
            # agrees with advancing theta
            rot = receiver_frame_rotation(rx, n)
            dt = 1.0
            moved = Rotation.from_rotvec(n * rx_s.angular_rate_rad_s * dt).apply(rx)
            in_frame = rot @ moved
            assert abs(in_frame[1]) < 1e-6
            assert np.allclose(in_frame, spherical_to_cartesian(rx_s, dt), atol=1e-6)

    def test_invalid_normal(self):
        with pytest.raises(ValueError):
            receiver_frame_rotation(np.array([7e6, 0, 0]), [0, 0, 0])
        with pytest.raises(ValueError):
            receiver_frame_rotation(np.array([7e6, 0, 0]), [1, 0, 0])


class TestResidual:
    def test_positive_at_emission(self):
        tx0 = np.array([7e6, 0, 0])
        rx = OrbitState(7e6, 1.0, 0.0, 1e-3)
        d = np.linalg.norm(spherical_to_cartesian(rx) - tx0)
        f0 = wavefront_residual(tx0, rx, 0.0)
        assert f0 > 0
        assert f0 == pytest.approx(d * d, rel=1e-15)

    def test_negative_at_bracket(self):
        tx0 = np.array([7e6, 0, 0])
        rx = OrbitState(7.2e6, 2.0, 0.0, 1e-3)
        assert wavefront_residual(tx0, rx, arrival_time_bracket(tx0, rx)) < 0

    def test_static_receiver_root(self):
        tx0 = np.array([7e6, 0, 0])
        rx = OrbitState(7e6, 1.0, 0.0, 0.0)
        d = float(np.linalg.norm(spherical_to_cartesian(rx) - tx0))
        assert abs(wavefront_residual(tx0, rx, d / C)) <= 8 * np.spacing(d * d)

    def test_bracket_on_random_geometries(self):
        rng = np.random.default_rng(17)
        for _ in range(1000):
            tx0, rx = random_geometry(rng, K)
            assert wavefront_residual(tx0, rx, 0.0) >= 0
            assert wavefront_residual(tx0, rx, arrival_time_bracket(tx0, rx)) < 0


class TestSolve:
    def test_static(self):
        d = 4.085e6
        tx0 = np.array([0.0, 0.0, 7e6 - d])
        rx = OrbitState(7e6, 0.0, 0.0, 0.0)
        tau = solve_arrival_time(tx0, rx)
        assert tau == pytest.approx(d / C, abs=1e-12)
        assert tau == pytest.approx(1.3626e-2, abs=1e-6)

    def test_iridium_against_scan_newton_oracle(self):
        delta = 2 * math.pi / 11
        omega = circular_angular_rate(IRIDIUM_R)
        tx0 = spherical_to_cartesian(OrbitState(IRIDIUM_R, 0.5, 0.0, 0.0))
        rx = OrbitState(IRIDIUM_R, 0.5 + delta, 0.0, omega)
        tau = solve_arrival_time(tx0, rx)
        assert tau == pytest.approx(planar_arrival_oracle(IRIDIUM_R, delta, omega), abs=1e-7)

    @pytest.mark.parametrize("spec", [iridium_spec(), starlink_spec()])
    @pytest.mark.parametrize("kind", list(LinkType))
    def test_unique_root_for_constellation_links(self, spec, kind):
        geom = scenario_links(spec, LinkSelection(kind))
        tx0 = spherical_to_cartesian(geom.tx_state)
        assert geom.residual_roots == 1
        assert count_residual_roots(tx0, geom.rx_state, n_scan=20001) == 1

    def test_iteration_count(self):
        calls = []

        def counting(*args):
            calls.append(1)
            return wavefront_residual(*args)

        tx0 = spherical_to_cartesian(OrbitState(IRIDIUM_R, 0.5, 0.0, 0.0))
        rx = OrbitState(IRIDIUM_R, 1.0, 0.0, 1e-3)
        tol = 1e-12
        solve_arrival_time(tx0, rx, tol_s=tol, residual=counting)
        iters = len(calls) - 2
        assert iters <= math.ceil(math.log2(arrival_time_bracket(tx0, rx) / tol))

    def test_sign_flip_detected(self):
        tx0 = spherical_to_cartesian(OrbitState(IRIDIUM_R, 0.5, 0.0, 0.0))
        rx = OrbitState(IRIDIUM_R, 1.0, 0.0, 1e-3)
        with pytest.raises(BracketError):
            solve_arrival_time(tx0, rx, residual=lambda *a: -wavefront_residual(*a))

    def test_lower_bound_sanity(self):
        rng = np.random.default_rng(23)
        for _ in range(300):
            tx0, rx = random_geometry(rng, K)
            tau = solve_arrival_time(tx0, rx)
            a = np.linalg.norm(spherical_to_cartesian(rx) - tx0)
            bound = a / C - rx.angular_rate_rad_s * rx.radius_m * arrival_time_bracket(tx0, rx) / C
            assert tau >= bound
            assert 0 <= tau <= arrival_time_bracket(tx0, rx)


class TestDisplacement:
    def test_collinear(self):
        a = np.array([1.0, 2.0, 3.0])
        assert displacement(np.zeros(3), a, 2.5 * a)[1] == pytest.approx(0.0, abs=1e-12)

    def test_perpendicular(self):
        s_vec, s = displacement(np.zeros(3), np.array([1.0, 0, 0]), np.array([0, 4.0, 0]))
        assert s == 4.0

    def test_iridium_intra_closed_form(self):
        delta = 2 * math.pi / 11
        omega = circular_angular_rate(IRIDIUM_R)
        tx = OrbitState(IRIDIUM_R, 0.4, 0.0, omega)
        rx = OrbitState(IRIDIUM_R, 0.4 + delta, 0.0, omega)
        geom = link_displacement(tx, rx)
        phi = omega * geom.arrival_time_s
        # chord swept by rx times the sine of its angle to the line of sight
        expected = 2 * IRIDIUM_R * math.sin(phi / 2) * math.sin((delta + phi) / 2)
        assert geom.displacement_m == pytest.approx(expected, rel=1e-6)
        assert 10 < geom.displacement_m < 1000

    def test_static_receiver(self):
        tx = OrbitState(7e6, 0.4, 0.0, 0.0)
        rx = OrbitState(7e6, 0.9, 0.0, 0.0)
        assert link_displacement(tx, rx).displacement_m == pytest.approx(0.0, abs=1e-6)

    def test_orthogonal_to_line_of_sight(self):
        rng = np.random.default_rng(29)
        for _ in range(200):
            tx0, rx = random_geometry(rng, K)
            tx = OrbitState(*cartesian_to_spherical(tx0), 0.0)
            geom = link_displacement(tx, rx)
            a = spherical_to_cartesian(rx) - tx0
            s_vec = geom.displacement_vector
            assert abs(s_vec @ a) <= 1e-6 * np.linalg.norm(s_vec) * np.linalg.norm(a) + 1e-9

    @settings(max_examples=50, deadline=None)
    @given(st.integers(0, 2**32 - 1))
    def test_frame_invariance(self, seed):
        spec = iridium_spec()
        tx, _ = satellite_eci(spec, 0, 0, K)
        rx, n = satellite_eci(spec, 1, 0, K)
        rot = Rotation.random(random_state=seed).as_matrix()
        base = link_displacement(*to_receiver_centric(tx, rx, n)).displacement_m
        turned = link_displacement(*to_receiver_centric(rot @ tx, rot @ rx, rot @ n)).displacement_m
        assert turned == pytest.approx(base, rel=1e-9)

    def test_inter_plane_displacement_per_meter_exceeds_intra(self):
        spec = starlink_spec()
        intra = scenario_links(spec, LinkSelection(LinkType.INTRA_OP))
        inter = scenario_links(spec, LinkSelection(LinkType.INTER_OP))
        assert (inter.displacement_m / inter.chord_distance_m
                > intra.displacement_m / intra.chord_distance_m)
