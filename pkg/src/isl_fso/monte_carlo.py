"""Stochastic checks of the analytic channel model.

Two samplers that do not share code paths with the series CDF:

* :func:`sample_radial` draws the 2-D Gaussian offset directly and takes its
  norm, the constructive definition of the Rician radius;
* :func:`sample_gain_rejection` draws gains by accept/reject against the
  closed-form gain PDF.

Streams are keyed by ``(seed, stream_id)`` through :class:`numpy.random.SeedSequence`
so rows of a sweep can be sampled independently and reproducibly.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import optimize, stats

from .link_budget import TransceiverParams, threshold_gain
from .pointing_stats import PointingModel, gain_pdf

_CHUNK = 1 << 20


@dataclass(frozen=True)
class RngStream:
    seed: int
    stream_id: int = 0

    def generator(self) -> np.random.Generator:
        ss = np.random.SeedSequence(entropy=self.seed, spawn_key=(self.stream_id,))
        return np.random.Generator(np.random.PCG64(ss))


@dataclass(frozen=True)
class OutageEstimate:
    point_estimate: float
    sample_count: int
    wilson_ci_low: float
    wilson_ci_high: float
    failures: int = 0


class EnvelopeError(RuntimeError):
    """The gain PDF maximum could not be bracketed for rejection sampling."""


def wilson_interval(failures: int, n: int, confidence: float = 0.99) -> tuple[float, float]:
    z = stats.norm.ppf(0.5 + confidence / 2.0)
    p = failures / n
    denom = 1.0 + z * z / n
    center = (p + z * z / (2 * n)) / denom
    half = z * math.sqrt(p * (1 - p) / n + z * z / (4 * n * n)) / denom
    lo = 0.0 if failures == 0 else max(0.0, center - half)
    hi = 1.0 if failures == n else min(1.0, center + half)
    return float(lo), float(hi)


def sample_radial(model: PointingModel, stream: RngStream, n: int) -> np.ndarray:
    """Radial offsets ``|(s, 0) + l sigma_j (Z1, Z2)|``."""
    if n < 1:
        raise ValueError("n must be >= 1")
    rng = stream.generator()
    sig = model.jitter_sigma_m
    z = rng.standard_normal((n, 2))
    return np.hypot(model.displacement_m + sig * z[:, 0], sig * z[:, 1])


def _pdf_envelope(model: PointingModel) -> float:
    """Maximum of the gain PDF on (0, A0], located on a log grid then refined."""
    a0 = model.a0_gain
    # work in u = ln(A0 / h); the mode sits near zeta = gamma^2 u ~ nu
    nu = model.nu
    u_max = min((200.0 + 4.0 * nu + 40.0 * math.sqrt(nu)) / model.gamma**2, 700.0)
    u = np.concatenate([[0.0], np.geomspace(1e-8, u_max, 400)])
    vals = gain_pdf(model, a0 * np.exp(-u))
    if not np.all(np.isfinite(vals)):
        raise EnvelopeError("gain PDF is not finite on the envelope grid")
    i = int(np.argmax(vals))
    lo, hi = u[max(i - 1, 0)], u[min(i + 1, len(u) - 1)]
    best = vals[i]
    if hi > lo:
        res = optimize.minimize_scalar(lambda x: -gain_pdf(model, a0 * math.exp(-x)),
                                       bounds=(lo, hi), method="bounded",
                                       options={"xatol": 1e-12 * max(hi, 1e-300)})
        best = max(best, -res.fun)
    return best * 1.001


def sample_gain_rejection(model: PointingModel, stream: RngStream, n: int) -> np.ndarray:
    """Channel gains drawn by rejection from the closed-form PDF.

    The proposal is uniform on (0, A0] under a constant envelope.  When
    ``gamma**2 <= 1`` the density is unbounded at ``h -> 0`` and the sampler
    falls back to transforming :func:`sample_radial` draws.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    a0 = model.a0_gain
    if model.gamma**2 <= 1.0:
        r = sample_radial(model, stream, n)
        return a0 * np.exp(-2.0 * r * r / model.omega_eq_m**2)
    envelope = _pdf_envelope(model)
    accept_rate = 1.0 / (envelope * a0)
    if accept_rate < 1e-7:
        raise EnvelopeError(f"acceptance rate {accept_rate:.2e} too low for a uniform proposal")
    rng = stream.generator()
    out = np.empty(n)
    filled = 0
    while filled < n:
        batch = min(_CHUNK, int((n - filled) / accept_rate * 1.1) + 64)
        h = a0 * (1.0 - rng.random(batch))  # (0, A0]
        keep = h[rng.random(batch) * envelope < gain_pdf(model, h)]
        take = min(len(keep), n - filled)
        out[filled:filled + take] = keep[:take]
        filled += take
    return out


def estimate_outage(model: PointingModel, t: TransceiverParams, stream: RngStream,
                    n: int, confidence: float = 0.99, *,
                    h_threshold: float | None = None) -> OutageEstimate:
    """Fraction of sampled gains below the rate threshold, with a Wilson interval.

    ``h_threshold`` replaces the gain threshold derived from ``t``.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    h_th = threshold_gain(t) if h_threshold is None else h_threshold
    a0 = model.a0_gain
    if h_th >= a0 or h_th <= 0.0:
        p = 1.0 if h_th >= a0 else 0.0
        failures = n if p else 0
        lo, hi = wilson_interval(failures, n, confidence)
        return OutageEstimate(p, n, lo, hi, failures)
    # gain < h_th  <=>  r > r_th; comparing radii avoids exp underflow far out
    r_th_sq = 0.5 * model.omega_eq_m**2 * math.log(a0 / h_th)
    rng = stream.generator()
    sig = model.jitter_sigma_m
    s = model.displacement_m
    failures = 0
    remaining = n
    while remaining:
        m = min(_CHUNK, remaining)
        z = rng.standard_normal((m, 2))
        x = s + sig * z[:, 0]
        y = sig * z[:, 1]
        failures += int(np.count_nonzero(x * x + y * y > r_th_sq))
        remaining -= m
    lo, hi = wilson_interval(failures, n, confidence)
    return OutageEstimate(failures / n, n, lo, hi, failures)
