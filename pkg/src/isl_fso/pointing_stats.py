"""Pointing-error statistics and the distribution of the channel gain.

Transmitter jitter with angular standard deviation ``sigma_j`` produces a
zero-mean Gaussian lateral offset of standard deviation ``l * sigma_j`` per
axis at distance ``l``; a static misalignment ``s`` shifts its mean, so the
radial offset is Rician.  Pushing it through the Gaussian gain model gives
the gain PDF and a Poisson-mixture series for the CDF::

    F(h) = exp(-nu) * sum_n nu**n / (n!)**2 * Gamma(n + 1, zeta)

with ``nu = s**2 / (2 l**2 sigma_j**2)`` and ``zeta = gamma**2 ln(A0 / h)``.
The series is truncated at the index returned by :func:`truncation_index`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from .beam_optics import ApertureChannel


class ConvergenceError(RuntimeError):
    """The truncation index exceeded the configured cap."""

    def __init__(self, message: str, nu: float):
        super().__init__(f"{message} (nu={nu:.6g})")
        self.nu = nu


@dataclass(frozen=True)
class TruncationPolicy:
    """Controls the series truncation.

    ``epsilon`` bounds the magnitude of the first discarded term,
    ``n_init`` is the initial upper bracket of the bisection and
    ``n_max_cap`` is the largest admissible number of terms.
    """

    epsilon: float = 1e-12
    n_init: int = 64
    n_max_cap: int = 10_000_000

    def __post_init__(self):
        if not 0.0 < self.epsilon < 1.0:
            raise ValueError(f"epsilon must lie in (0, 1), got {self.epsilon!r}")
        if self.n_init < 2:
            raise ValueError(f"n_init must be >= 2, got {self.n_init!r}")
        if self.n_max_cap < self.n_init:
            raise ValueError("n_max_cap must be >= n_init")


@dataclass(frozen=True)
class PointingModel:
    """Jitter plus misalignment pointing error on one link."""

    distance_m: float
    jitter_angle_rad: float
    displacement_m: float
    omega_eq_m: float
    a0_gain: float

    def __post_init__(self):
        if not self.distance_m > 0:
            raise ValueError("distance_m must be > 0")
        if not self.jitter_angle_rad >= 0:
            raise ValueError("jitter_angle_rad must be >= 0")
        if not self.displacement_m >= 0:
            raise ValueError("displacement_m must be >= 0")
        if not (self.omega_eq_m > 0 and 0 < self.a0_gain <= 1):
            raise ValueError("invalid aperture constants")

    @property
    def jitter_sigma_m(self) -> float:
        return jitter_sigma_at_receiver(self.distance_m, self.jitter_angle_rad)

    @property
    def gamma(self) -> float:
        sig = self.jitter_sigma_m
        return math.inf if sig == 0 else self.omega_eq_m / (2.0 * sig)

    @property
    def nu(self) -> float:
        sig = self.jitter_sigma_m
        if sig == 0:
            return 0.0 if self.displacement_m == 0 else math.inf
        return self.displacement_m**2 / (2.0 * sig * sig)

    @property
    def is_degenerate(self) -> bool:
        """True when there is no jitter and the gain is deterministic."""
        return self.jitter_angle_rad == 0

    def with_displacement(self, displacement_m: float) -> "PointingModel":
        return PointingModel(self.distance_m, self.jitter_angle_rad, displacement_m,
                             self.omega_eq_m, self.a0_gain)


def pointing_model(channel: ApertureChannel, jitter_angle_rad: float,
                   displacement_m: float = 0.0) -> PointingModel:
    return PointingModel(
        distance_m=channel.distance_m,
        jitter_angle_rad=jitter_angle_rad,
        displacement_m=displacement_m,
        omega_eq_m=channel.omega_eq_m,
        a0_gain=channel.a0_gain,
    )


def jitter_sigma_at_receiver(distance_m: float, jitter_angle_rad: float) -> float:
    """Per-axis standard deviation of the jitter offset at the receive plane."""
    return distance_m * jitter_angle_rad


def _as_output(x):
    return x if np.ndim(x) else float(x)


def rician_radial_pdf(model: PointingModel, r):
    """Rician density of the radial pointing offset (1/m)."""
    r = np.asarray(r, dtype=float)
    if np.any(r < 0):
        raise ValueError("r must be >= 0")
    var = model.jitter_sigma_m**2
    s = model.displacement_m
    # exp(-(r^2 + s^2) / 2v) I0(r s / v) == exp(-(r - s)^2 / 2v) i0e(r s / v)
    out = r / var * np.exp(-((r - s) ** 2) / (2.0 * var)) * special.i0e(r * s / var)
    return _as_output(out)


def gain_pdf(model: PointingModel, h):
    """Density of the channel gain on (0, A0]."""
    h = np.asarray(h, dtype=float)
    a0 = model.a0_gain
    if np.any((h <= 0) | (h > a0)):
        raise ValueError("h must lie in (0, A0]")
    g2 = model.gamma**2
    nu = model.nu
    log_ratio = np.log(h / a0)
    # Bessel argument (s / l^2 sig^2) sqrt(-(w_eq^2 / 2) ln(h / A0)) == 2 sqrt(nu zeta)
    x = 2.0 * np.sqrt(nu * g2 * np.maximum(-log_ratio, 0.0))
    log_f = (math.log(g2 / a0) + (g2 - 1.0) * log_ratio - nu
             + x + np.log(special.i0e(x)))
    return _as_output(np.exp(log_f))


def log_term_bound(n, nu: float):
    """Stirling estimate of ``ln(nu**n / n!)``, the bound on the n-th series term."""
    n = np.asarray(n, dtype=float)
    return n * (1.0 + math.log(nu) - np.log(n)) - 0.5 * np.log(2.0 * math.pi * n)


def truncation_index(nu: float, policy: TruncationPolicy = TruncationPolicy()) -> int:
    """Number of series terms ``N`` found by bisection on the Stirling bound.

    Returns the smallest ``N`` in ``(1, N_max]`` with ``ln U_N < ln eps``.  The
    upper bracket starts at ``policy.n_init`` and doubles until it brackets.
    """
    if not nu >= 0 or not math.isfinite(nu):
        raise ValueError(f"nu must be finite and >= 0, got {nu!r}")
    if nu == 0:
        return 1
    log_eps = math.log(policy.epsilon)
    n_min, n_max = 1, policy.n_init
    while log_term_bound(n_max, nu) >= log_eps:
        n_min, n_max = n_max, 2 * n_max
        if n_max > policy.n_max_cap:
            raise ConvergenceError(
                f"truncation index exceeds n_max_cap={policy.n_max_cap}", nu)
    while n_max - n_min > 1:
        n = (n_min + n_max) // 2
        if log_term_bound(n, nu) < log_eps:
            n_max = n
        else:
            n_min = n
    return n_max


def _log_q_table(zeta: np.ndarray, n_terms: int) -> np.ndarray:
    """``ln Q(n + 1, zeta)`` for ``n = 0 .. n_terms - 1``, one row per ``zeta``.

    Uses ``Gamma(n + 1, z) = n Gamma(n, z) + z**n e**-z``, which for the
    regularized function is a running sum of Poisson(zeta) probabilities;
    accumulating in log space avoids underflow for large ``zeta``.
    """
    k = np.arange(n_terms, dtype=float)
    z = np.asarray(zeta, dtype=float)[:, None]
    log_pmf = special.xlogy(k, z) - z - special.gammaln(k + 1.0)
    return np.logaddexp.accumulate(log_pmf, axis=1)


def gain_cdf_series(model: PointingModel, h,
                    policy: TruncationPolicy = TruncationPolicy(), *,
                    n_terms: int | None = None):
    """Truncated series CDF of the channel gain, clamped to [0, 1].

    ``n_terms`` overrides the truncation index; it exists for convergence
    studies.
    """
    h_arr = np.asarray(h, dtype=float)
    a0 = model.a0_gain
    if np.any((h_arr < 0) | (h_arr > a0 * (1 + 1e-12))):
        raise ValueError("h must lie in [0, A0]")
    h_arr = np.minimum(h_arr, a0)

    if model.is_degenerate:
        h_s = a0 * math.exp(-2.0 * model.displacement_m**2 / model.omega_eq_m**2)
        return _as_output(np.where(h_arr >= h_s, 1.0, 0.0))

    nu = model.nu
    g2 = model.gamma**2
    n = truncation_index(nu, policy) if n_terms is None else int(n_terms)
    if n > policy.n_max_cap:
        raise ConvergenceError(f"{n} terms exceed n_max_cap={policy.n_max_cap}", nu)

    flat = h_arr.ravel()
    out = np.zeros_like(flat)
    pos = flat > 0
    with np.errstate(divide="ignore"):
        zeta = g2 * np.log(a0 / flat[pos])
    if nu == 0.0:
        # only the n = 0 term Gamma(1, zeta) = exp(-zeta) survives; the power
        # form (h / A0)**gamma^2 is the same number with one rounding step
        out[pos] = (flat[pos] / a0) ** g2
    else:
        k = np.arange(n, dtype=float)
        log_w = special.xlogy(k, nu) - nu - special.gammaln(k + 1.0)
        vals = np.empty_like(zeta)
        step = max(1, 2_000_000 // n)
        for i in range(0, len(zeta), step):
            log_q = _log_q_table(zeta[i:i + step], n)
            vals[i:i + step] = np.exp(log_w + log_q).sum(axis=1)
        out[pos] = vals
        out[flat == a0] = 1.0  # Gamma(n + 1, 0) = n! sums the weights to exactly 1
    out = np.clip(out, 0.0, 1.0).reshape(h_arr.shape)
    return _as_output(out)


def rayleigh_gain_cdf(model: PointingModel, h):
    """Closed-form CDF ``(h / A0)**gamma^2`` for the jitter-only case."""
    h = np.asarray(h, dtype=float)
    if np.any((h < 0) | (h > model.a0_gain * (1 + 1e-12))):
        raise ValueError("h must lie in [0, A0]")
    out = np.minimum(h / model.a0_gain, 1.0) ** model.gamma**2
    return _as_output(out)
