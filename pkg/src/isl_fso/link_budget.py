"""SNR, rate threshold and outage probability of an optical ISL."""
from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass

import numpy as np

from .beam_optics import ApertureChannel, BeamParams, aperture_params
from .pointing_stats import (PointingModel, TruncationPolicy, gain_cdf_series,
                             pointing_model, rayleigh_gain_cdf)


def dbm_to_watts(dbm):
    out = 10.0 ** ((np.asarray(dbm, dtype=float) - 30.0) / 10.0)
    return out if out.ndim else float(out)


def watts_to_dbm(watts):
    out = 10.0 * np.log10(np.asarray(watts, dtype=float)) + 30.0
    return out if out.ndim else float(out)


@dataclass(frozen=True)
class TransceiverParams:
    """Receiver and rate parameters.

    ``bandwidth_hz`` normalizes the rate: the SNR threshold is
    ``2**(target_rate_bps / bandwidth_hz) - 1``.
    """

    responsivity_a_per_w: float = 0.87
    transmit_power_w: float = dbm_to_watts(28.0)
    noise_variance_a2: float = 1.6e-14
    bandwidth_hz: float = 1e9
    target_rate_bps: float = 1e9

    def __post_init__(self):
        for name in ("responsivity_a_per_w", "transmit_power_w", "noise_variance_a2",
                     "bandwidth_hz", "target_rate_bps"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise ValueError(f"{name} must be finite and > 0, got {value!r}")

    @classmethod
    def from_dbm(cls, transmit_power_dbm: float, **kwargs) -> "TransceiverParams":
        return cls(transmit_power_w=dbm_to_watts(transmit_power_dbm), **kwargs)

    @property
    def transmit_power_dbm(self) -> float:
        return watts_to_dbm(self.transmit_power_w)

    def replace(self, **changes) -> "TransceiverParams":
        return dataclasses.replace(self, **changes)


def snr(h, t: TransceiverParams):
    """Electrical SNR ``(h R P_t)**2 / sigma_n**2``."""
    h = np.asarray(h, dtype=float)
    if np.any(h < 0):
        raise ValueError("h must be >= 0")
    out = (h * t.responsivity_a_per_w * t.transmit_power_w) ** 2 / t.noise_variance_a2
    return out if out.ndim else float(out)


def snr_threshold(t: TransceiverParams) -> float:
    x = t.target_rate_bps / t.bandwidth_hz
    # expm1 keeps precision for low spectral efficiency; 2**x - 1 is exact at integers
    return math.expm1(math.log(2.0) * x) if x < 0.25 else 2.0**x - 1.0


def threshold_gain(t: TransceiverParams) -> float:
    """Smallest channel gain that supports ``target_rate_bps``."""
    return (math.sqrt(t.noise_variance_a2 * snr_threshold(t))
            / (t.responsivity_a_per_w * t.transmit_power_w))


def outage_probability(model: PointingModel, t: TransceiverParams,
                       policy: TruncationPolicy = TruncationPolicy()) -> float:
    """Probability that the instantaneous capacity falls below the target rate."""
    h_th = threshold_gain(t)
    if h_th >= model.a0_gain:
        return 1.0
    if model.displacement_m == 0 and not model.is_degenerate:
        return rayleigh_gain_cdf(model, h_th)
    return gain_cdf_series(model, h_th, policy)


@dataclass(frozen=True)
class OpticalTerminal:
    """Transmit beam, receive aperture and transmitter jitter of a link."""

    beam: BeamParams = BeamParams(waist_radius_m=1.25e-2, wavelength_m=1550e-9)
    aperture_radius_m: float = 0.2
    jitter_angle_rad: float = 8e-6

    def channel(self, distance_m: float) -> ApertureChannel:
        return aperture_params(self.beam, distance_m, self.aperture_radius_m)

    def pointing_model(self, distance_m: float, displacement_m: float = 0.0) -> PointingModel:
        return pointing_model(self.channel(distance_m), self.jitter_angle_rad, displacement_m)


def link_outage(terminal: OpticalTerminal, t: TransceiverParams, distance_m: float,
                displacement_m: float = 0.0,
                policy: TruncationPolicy = TruncationPolicy()) -> float:
    return outage_probability(terminal.pointing_model(distance_m, displacement_m), t, policy)
