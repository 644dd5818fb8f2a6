"""Gaussian beam propagation and circular-aperture power collection.

The beam radius follows the diffraction law for a Gaussian beam and the
collected power is approximated by a Gaussian in the pointing offset with an
equivalent width, valid in the far field where the aperture radius is much
smaller than the beam radius.  :func:`collected_power_exact` integrates the
intensity over the aperture and is the fallback outside that regime.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate, special


class QuadratureError(RuntimeError):
    """Adaptive quadrature did not reach the requested tolerance."""

    def __init__(self, message: str, error_estimate: float):
        super().__init__(f"{message} (error estimate {error_estimate:.3e})")
        self.error_estimate = error_estimate


def _check_finite(name: str, value: float, *, positive: bool = False) -> float:
    value = float(value)
    if not math.isfinite(value):
        raise ValueError(f"{name} must be finite, got {value!r}")
    if positive and value <= 0.0:
        raise ValueError(f"{name} must be > 0, got {value!r}")
    if value < 0.0:
        raise ValueError(f"{name} must be >= 0, got {value!r}")
    return value


@dataclass(frozen=True)
class BeamParams:
    """Transmit beam: waist radius and optical wavelength, both in meters."""

    waist_radius_m: float
    wavelength_m: float

    def __post_init__(self):
        _check_finite("waist_radius_m", self.waist_radius_m, positive=True)
        _check_finite("wavelength_m", self.wavelength_m, positive=True)

    @property
    def rayleigh_range_m(self) -> float:
        return math.pi * self.waist_radius_m**2 / self.wavelength_m


@dataclass(frozen=True)
class ApertureChannel:
    """Beam and aperture constants for one link distance.

    Attributes
    ----------
    distance_m : float
        Link distance.
    aperture_radius_m : float
        Receiver aperture radius ``a``.
    beam_radius_m : float
        Beam radius at the receiver.
    v_param : float
        ``sqrt(pi) * a / (sqrt(2) * beam_radius)``.
    a0_gain : float
        On-axis fraction of power collected, ``erf(v)**2``.
    omega_eq_m : float
        Equivalent beam width of the Gaussian gain approximation.
    """

    distance_m: float
    aperture_radius_m: float
    beam_radius_m: float
    v_param: float
    a0_gain: float
    omega_eq_m: float


def beam_radius(beam: BeamParams, distance_m: float) -> float:
    """Beam radius (1/e^2 intensity) after propagating ``distance_m``."""
    distance_m = _check_finite("distance_m", distance_m)
    w0 = beam.waist_radius_m
    return w0 * math.hypot(1.0, beam.wavelength_m * distance_m / (math.pi * w0 * w0))


def aperture_params(beam: BeamParams, distance_m: float,
                    aperture_radius_m: float) -> ApertureChannel:
    """Precompute ``A0``, ``v`` and the equivalent beam width for a link."""
    distance_m = _check_finite("distance_m", distance_m, positive=True)
    a = _check_finite("aperture_radius_m", aperture_radius_m, positive=True)
    w = beam_radius(beam, distance_m)
    v = math.sqrt(math.pi) * a / (math.sqrt(2.0) * w)
    erf_v = math.erf(v)
    a0 = erf_v * erf_v
    # log form: exp(v^2) overflows for v > ~26, where omega_eq is effectively infinite
    log_weq_sq = (2.0 * math.log(w) + 0.5 * math.log(math.pi) + math.log(erf_v)
                  + v * v - math.log(2.0 * v))
    omega_eq = math.exp(0.5 * log_weq_sq) if log_weq_sq < 1400.0 else math.inf
    return ApertureChannel(
        distance_m=distance_m,
        aperture_radius_m=a,
        beam_radius_m=w,
        v_param=v,
        a0_gain=a0,
        omega_eq_m=omega_eq,
    )


def gaussian_intensity(beam: BeamParams, radial_offset_m, distance_m: float):
    """Normalized Gaussian intensity profile at the receive plane (1/m^2)."""
    w = beam_radius(beam, distance_m)
    r = np.asarray(radial_offset_m, dtype=float)
    out = 2.0 / (math.pi * w * w) * np.exp(-2.0 * r * r / (w * w))
    return out if out.ndim else float(out)


def channel_gain(ch: ApertureChannel, pointing_offset_m):
    """Collected power fraction ``A0 * exp(-2 r^2 / omega_eq^2)``."""
    r = np.asarray(pointing_offset_m, dtype=float)
    if np.any(r < 0):
        raise ValueError("pointing offset must be >= 0")
    out = ch.a0_gain * np.exp(-2.0 * r * r / ch.omega_eq_m**2)
    return out if out.ndim else float(out)


def inverse_channel_gain(ch: ApertureChannel, h):
    """Pointing offset producing gain ``h``; inverse of :func:`channel_gain` on (0, A0]."""
    h = np.asarray(h, dtype=float)
    with np.errstate(divide="ignore"):
        r = ch.omega_eq_m * np.sqrt(0.5 * np.maximum(np.log(ch.a0_gain / h), 0.0))
    return r if r.ndim else float(r)


def collected_power_exact(ch: ApertureChannel, beam: BeamParams,
                          pointing_offset_m: float, *, rtol: float = 1e-12) -> float:
    """Integrate the beam intensity over a circular aperture offset by ``r``.

    The angular integral around the aperture center has the closed form
    ``2 pi exp(-2 (rho^2 + r^2) / w^2) I0(4 rho r / w^2)``, which leaves an
    adaptive one-dimensional radial quadrature.  The exponentially scaled
    Bessel function keeps the integrand finite for large offsets.
    """
    r = _check_finite("pointing_offset_m", pointing_offset_m)
    a = ch.aperture_radius_m
    if a == 0.0:
        return 0.0
    w = beam_radius(beam, ch.distance_m)
    k = 2.0 / (w * w)

    def integrand(rho):
        # exp(-k (rho^2 + r^2)) I0(2 k rho r) == exp(-k (rho - r)^2) i0e(2 k rho r)
        return 2.0 * k * rho * math.exp(-k * (rho - r) ** 2) * special.i0e(2.0 * k * rho * r)

    points = [r] if 0.0 < r < a else None
    value, err = integrate.quad(integrand, 0.0, a, points=points,
                                epsabs=0.0, epsrel=rtol, limit=200)
    if err > 1e-9 * abs(value) + 1e-300:
        raise QuadratureError("aperture integral did not converge", err)
    return value
