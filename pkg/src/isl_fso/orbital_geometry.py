"""Circular-orbit kinematics and the motion-induced beam displacement.

The transmitter aims at the receiver's position at emission.  While the
light travels, the receiver moves along its orbit; the arrival time ``tau``
solves ``|rx(tau) - tx0|**2 - c**2 tau**2 = 0`` and the displacement is the
component of ``rx(tau) - tx0`` orthogonal to the original line of sight.

Positions are numpy arrays of shape (3,) in meters.  Receiver motion is
described in a receiver-centric frame in which the receiver orbit normal is
+y, so the receiver moves in the polar angle only.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

Vec3 = np.ndarray


class BracketError(RuntimeError):
    """The arrival-time residual did not change sign over the bracket."""


@dataclass(frozen=True)
class PhysicalConstants:
    mu_earth_m3_s2: float = 3.986004418e14
    light_speed_m_s: float = 299_792_458.0
    earth_radius_m: float = 6.371e6


EQUATORIAL_EARTH_RADIUS_M = 6.378137e6
DEFAULT_CONSTANTS = PhysicalConstants()


@dataclass(frozen=True)
class OrbitState:
    """Spherical state ``(r, theta, psi)`` moving at rate ``omega`` in ``theta``."""

    radius_m: float
    polar_rad: float
    azimuth_rad: float
    angular_rate_rad_s: float

    def __post_init__(self):
        if not self.radius_m > 0:
            raise ValueError("radius_m must be > 0")


@dataclass(frozen=True)
class LinkGeometry:
    tx_state: OrbitState
    rx_state: OrbitState
    chord_distance_m: float
    arrival_time_s: float
    displacement_m: float
    displacement_vector: Vec3 | None = None
    bracket_upper_s: float = math.nan
    residual_roots: int = 1


def circular_angular_rate(radius_m: float, k: PhysicalConstants = DEFAULT_CONSTANTS) -> float:
    if not radius_m > 0:
        raise ValueError("radius_m must be > 0")
    return math.sqrt(k.mu_earth_m3_s2 / radius_m**3)


def spherical_to_cartesian(state: OrbitState, dt_s=0.0):
    """Position at ``theta + omega dt`` (vectorized over ``dt_s``)."""
    dt = np.asarray(dt_s, dtype=float)
    theta = state.polar_rad + state.angular_rate_rad_s * dt
    sin_t = np.sin(theta)
    pos = np.stack([
        state.radius_m * sin_t * np.cos(state.azimuth_rad) * np.ones_like(theta),
        state.radius_m * sin_t * np.sin(state.azimuth_rad) * np.ones_like(theta),
        state.radius_m * np.cos(theta),
    ], axis=-1)
    return pos


def cartesian_to_spherical(pos: Vec3) -> tuple[float, float, float]:
    """``(r, theta, psi)`` with ``theta`` in [0, pi] and ``psi`` in (-pi, pi]."""
    x, y, z = (float(c) for c in pos)
    r = math.sqrt(x * x + y * y + z * z)
    theta = math.acos(max(-1.0, min(1.0, z / r)))
    psi = math.atan2(y, x)
    return r, theta, psi


def _rotation_to_y(n: np.ndarray) -> np.ndarray:
    """Smallest rotation mapping unit vector ``n`` onto +y."""
    y = np.array([0.0, 1.0, 0.0])
    v = np.cross(n, y)
    c = float(n @ y)
    s = float(np.linalg.norm(v))
    if s < 1e-15:
        if c > 0:
            return np.eye(3)
        # antiparallel: half turn about x
        return np.diag([1.0, -1.0, -1.0])
    vx = np.array([[0.0, -v[2], v[1]], [v[2], 0.0, -v[0]], [-v[1], v[0], 0.0]])
    return np.eye(3) + vx + vx @ vx * ((1.0 - c) / (s * s))


def receiver_frame_rotation(rx_eci: Vec3, rx_orbit_normal: Vec3) -> np.ndarray:
    """Orthonormal matrix taking ECI vectors into the receiver-centric frame.

    The orbit normal maps to +y and the receiver lands in the ``x >= 0``
    half of the x-z plane, so it has ``psi = 0`` and moves in ``theta``.
    """
    n = np.asarray(rx_orbit_normal, dtype=float)
    norm = float(np.linalg.norm(n))
    if not norm > 0 or not math.isfinite(norm):
        raise ValueError("receiver orbit normal must be a nonzero finite vector")
    n = n / norm
    rx = np.asarray(rx_eci, dtype=float)
    if abs(float(rx @ n)) > 1e-9 * float(np.linalg.norm(rx)):
        raise ValueError("receiver position is not in the plane orthogonal to its orbit normal")
    rot = _rotation_to_y(n)
    if (rot @ rx)[0] < 0:
        rot = np.diag([-1.0, 1.0, -1.0]) @ rot
    return rot


def to_receiver_centric(tx_eci: Vec3, rx_eci: Vec3, rx_orbit_normal: Vec3,
                        k: PhysicalConstants = DEFAULT_CONSTANTS
                        ) -> tuple[OrbitState, OrbitState]:
    """Express both satellites in the receiver-centric spherical frame.

    The transmitter is frozen at emission; its state carries the circular
    rate for its radius but only the receiver's rate enters the link model.
    """
    rot = receiver_frame_rotation(rx_eci, rx_orbit_normal)
    states = []
    for pos in (tx_eci, rx_eci):
        r, theta, psi = cartesian_to_spherical(rot @ np.asarray(pos, dtype=float))
        states.append(OrbitState(r, theta, psi, circular_angular_rate(r, k)))
    tx, rx = states
    # rx sits on the x >= 0 half-plane; pin psi exactly so motion is purely polar
    rx = OrbitState(rx.radius_m, rx.polar_rad, 0.0, rx.angular_rate_rad_s)
    return tx, rx


def wavefront_residual(tx0: Vec3, rx: OrbitState, tau_s, k: PhysicalConstants = DEFAULT_CONSTANTS):
    """``|rx(tau) - tx0|**2 - (c tau)**2`` in m^2; zero when the wavefront meets the receiver."""
    tau = np.asarray(tau_s, dtype=float)
    d = spherical_to_cartesian(rx, tau) - np.asarray(tx0, dtype=float)
    out = np.einsum("...i,...i->...", d, d) - (k.light_speed_m_s * tau) ** 2
    return out if out.ndim else float(out)


def arrival_time_bracket(tx0: Vec3, rx: OrbitState,
                         k: PhysicalConstants = DEFAULT_CONSTANTS) -> float:
    """Upper end of the bracket ``sqrt(r_rx^2 + r_tx^2 + 4 r_rx r_tx) / c``."""
    r_tx = float(np.linalg.norm(tx0))
    r_rx = rx.radius_m
    return math.sqrt(r_rx**2 + r_tx**2 + 4.0 * r_rx * r_tx) / k.light_speed_m_s


def solve_arrival_time(tx0: Vec3, rx: OrbitState, k: PhysicalConstants = DEFAULT_CONSTANTS,
                       tol_s: float = 1e-12, *, residual=None) -> float:
    """Bisection for the signal arrival time on ``[0, tau_minus]``.

    ``residual`` defaults to :func:`wavefront_residual`; it is injectable so
    validation can exercise the bracket checks against a corrupted residual.
    """
    if not tol_s > 0:
        raise ValueError("tol_s must be > 0")
    f = wavefront_residual if residual is None else residual
    lo, hi = 0.0, arrival_time_bracket(tx0, rx, k)
    f_lo = f(tx0, rx, lo, k)
    f_hi = f(tx0, rx, hi, k)
    if f_lo == 0.0:
        return 0.0
    if not (f_lo > 0.0 and f_hi < 0.0):
        raise BracketError(f"residual does not change sign on [0, {hi:.6g}] s: "
                           f"F(0)={f_lo:.6g}, F(tau_minus)={f_hi:.6g}")
    while hi - lo > tol_s:
        mid = 0.5 * (lo + hi)
        if not lo < mid < hi:
            break  # tolerance below float resolution
        f_mid = f(tx0, rx, mid, k)
        if f_mid * f_lo < 0.0:
            hi = mid
        else:
            lo, f_lo = mid, f_mid
    return 0.5 * (lo + hi)


def count_residual_roots(tx0: Vec3, rx: OrbitState, k: PhysicalConstants = DEFAULT_CONSTANTS,
                         n_scan: int = 4097) -> int:
    """Sign changes of the residual on a uniform scan of ``[0, tau_minus]``."""
    tau = np.linspace(0.0, arrival_time_bracket(tx0, rx, k), n_scan)
    sign = np.sign(wavefront_residual(tx0, rx, tau, k))
    sign = sign[sign != 0]
    return int(np.count_nonzero(sign[1:] != sign[:-1]))


def displacement(tx0: Vec3, rx0: Vec3, rx_tau: Vec3) -> tuple[Vec3, float]:
    """Component of ``rx_tau - tx0`` orthogonal to the aiming line ``rx0 - tx0``."""
    tx0 = np.asarray(tx0, dtype=float)
    a = np.asarray(rx0, dtype=float) - tx0
    b = np.asarray(rx_tau, dtype=float) - tx0
    aa = float(a @ a)
    if not aa > 0:
        raise ValueError("transmitter and initial receiver positions coincide")
    s_vec = (float(b @ a) / aa) * a - b
    return s_vec, float(np.linalg.norm(s_vec))


def link_displacement(tx: OrbitState, rx: OrbitState, k: PhysicalConstants = DEFAULT_CONSTANTS,
                      tol_s: float = 1e-12) -> LinkGeometry:
    """Arrival time and displacement for states given in the receiver-centric frame."""
    tx0 = spherical_to_cartesian(tx)
    rx0 = spherical_to_cartesian(rx)
    tau = solve_arrival_time(tx0, rx, k, tol_s)
    rx_tau = spherical_to_cartesian(rx, tau)
    s_vec, s = displacement(tx0, rx0, rx_tau)
    roots = count_residual_roots(tx0, rx, k)
    if roots > 1:
        warnings.warn(f"arrival-time residual has {roots} sign changes; using the bisection root",
                      RuntimeWarning, stacklevel=2)
    return LinkGeometry(
        tx_state=tx,
        rx_state=rx,
        chord_distance_m=float(np.linalg.norm(rx0 - tx0)),
        arrival_time_s=tau,
        displacement_m=s,
        displacement_vector=s_vec,
        bracket_upper_s=arrival_time_bracket(tx0, rx, k),
        residual_roots=roots,
    )
