"""Self-checks run by ``isl-fso validate``.

Each check returns a :class:`CheckResult`; the report fails if any check
fails.  The checks compare the library against independent routes: adaptive
quadrature of the gain PDF, the scipy Rician survival function, exact
log-factorial truncation, randomized arrival-time brackets and the two
Monte-Carlo samplers.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate, stats

from .config import ScenarioConfig
from .constellation import iridium_spec, link_distances, starlink_spec
from .link_budget import OpticalTerminal
from .monte_carlo import RngStream, sample_gain_rejection, sample_radial
from .orbital_geometry import (OrbitState, PhysicalConstants, arrival_time_bracket,
                               circular_angular_rate, solve_arrival_time,
                               spherical_to_cartesian, wavefront_residual)
from .pointing_stats import (PointingModel, gain_cdf_series, gain_pdf,
                             rayleigh_gain_cdf, truncation_index)


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str

    def line(self) -> str:
        return f"{'PASS' if self.passed else 'FAIL'}  {self.name}: {self.detail}"


def cdf_by_quadrature(model: PointingModel, h: float) -> float:
    """Integrate the gain PDF over (0, h] in the variable ``u = ln(A0 / t)``."""
    a0 = model.a0_gain
    if h <= 0:
        return 0.0
    u0 = math.log(a0 / h)

    def integrand(u):
        t = a0 * math.exp(-u)
        return gain_pdf(model, t) * t

    upper = u0 + (60.0 + 4.0 * model.nu + 20.0 * math.sqrt(model.nu + 1.0)) / model.gamma**2
    val, _ = integrate.quad(integrand, u0, upper, epsabs=1e-13, epsrel=1e-11, limit=400)
    return val


def check_series_vs_quadrature(cfg: ScenarioConfig, seed: int = 0, n_models: int = 5) -> CheckResult:
    rng = np.random.default_rng(seed)
    terminal = cfg.terminal()
    worst = 0.0
    for _ in range(n_models):
        d = rng.uniform(5e5, 5e6)
        s = rng.uniform(0.0, 3.0) * d * terminal.jitter_angle_rad
        m = terminal.pointing_model(d, s)
        for h in m.a0_gain * np.linspace(0.02, 1.0, 10):
            worst = max(worst, abs(gain_cdf_series(m, h, cfg.policy()) - cdf_by_quadrature(m, h)))
    return CheckResult("series-vs-quadrature", worst < 1e-8, f"max abs error {worst:.2e}")


def check_series_vs_rician(cfg: ScenarioConfig, seed: int = 1) -> CheckResult:
    rng = np.random.default_rng(seed)
    terminal = cfg.terminal()
    worst = 0.0
    for _ in range(5):
        d = rng.uniform(5e5, 5e6)
        m = terminal.pointing_model(d, rng.uniform(0.0, 4.0) * d * terminal.jitter_angle_rad)
        h = m.a0_gain * np.linspace(0.01, 0.99, 25)
        sig = m.jitter_sigma_m
        r = m.omega_eq_m * np.sqrt(0.5 * np.log(m.a0_gain / h))
        ref = stats.rice.sf(r / sig, m.displacement_m / sig)
        worst = max(worst, float(np.max(np.abs(gain_cdf_series(m, h, cfg.policy()) - ref))))
    return CheckResult("series-vs-rician-sf", worst < 1e-9, f"max abs error {worst:.2e}")


def check_rayleigh_collapse(cfg: ScenarioConfig) -> CheckResult:
    m = cfg.terminal().pointing_model(2e6, 0.0)
    h = m.a0_gain * np.geomspace(1e-3, 1.0, 40)
    rel = np.abs(gain_cdf_series(m, h) / rayleigh_gain_cdf(m, h) - 1.0)
    return CheckResult("rayleigh-collapse", float(rel.max()) < 1e-14, f"max rel error {rel.max():.1e}")


def exact_truncation_index(nu: float, eps: float, n_max: int = 100_000) -> int:
    if nu == 0:
        return 1
    for n in range(1, n_max):
        if n * math.log(nu) - math.lgamma(n + 1) < math.log(eps):
            return n
    raise RuntimeError("no index found")


def check_truncation(cfg: ScenarioConfig) -> CheckResult:
    policy = cfg.policy()
    worst = 0
    for nu in (1e-6, 0.1, 1.0, 4.68, 20.0, 100.0):
        worst = max(worst, abs(truncation_index(nu, policy)
                               - exact_truncation_index(nu, policy.epsilon)))
    return CheckResult("truncation-index", worst <= 1, f"max |N - N_exact| = {worst}")


def random_geometry(rng: np.random.Generator, k: PhysicalConstants):
    """Random transmitter position and receiver state, altitudes 300-2000 km."""
    r_tx = k.earth_radius_m + rng.uniform(3e5, 2e6)
    r_rx = k.earth_radius_m + rng.uniform(3e5, 2e6)
    th_tx, th_rx = np.arccos(rng.uniform(-1, 1, 2))
    psi_tx, psi_rx = rng.uniform(-math.pi, math.pi, 2)
    tx0 = spherical_to_cartesian(OrbitState(r_tx, th_tx, psi_tx, 0.0))
    rx = OrbitState(r_rx, th_rx, psi_rx, circular_angular_rate(r_rx, k))
    return tx0, rx


def check_arrival_bracket(cfg: ScenarioConfig, n: int = 2000, seed: int = 2,
                          residual=wavefront_residual) -> CheckResult:
    k = cfg.constants()
    rng = np.random.default_rng(seed)
    bad = 0
    worst = 0.0
    for _ in range(n):
        tx0, rx = random_geometry(rng, k)
        tau_m = arrival_time_bracket(tx0, rx, k)
        if not (residual(tx0, rx, 0.0, k) >= 0 and residual(tx0, rx, tau_m, k) < 0):
            bad += 1
            continue
        tau = solve_arrival_time(tx0, rx, k, cfg.geometry.arrival_tol_s, residual=residual)
        err = abs(float(np.linalg.norm(spherical_to_cartesian(rx, tau) - tx0))
                  - k.light_speed_m_s * tau)
        worst = max(worst, err)
    ok = bad == 0 and worst < 1e-3
    return CheckResult("arrival-time-bracket", ok,
                       f"{bad}/{n} bracket violations, max range residual {worst:.2e} m")


def check_samplers(cfg: ScenarioConfig, seed: int = 3, n: int = 200_000) -> CheckResult:
    terminal: OpticalTerminal = cfg.terminal()
    d = 4.085e6
    m = terminal.pointing_model(d, 1.5 * d * terminal.jitter_angle_rad)
    a0 = m.a0_gain
    h_rad = a0 * np.exp(-2.0 * sample_radial(m, RngStream(seed, 0), n) ** 2 / m.omega_eq_m**2)
    h_rej = sample_gain_rejection(m, RngStream(seed, 1), n)
    grid = a0 * np.linspace(0.0, 1.0, 201)
    ref = gain_cdf_series(m, grid, cfg.policy())
    band = math.sqrt(math.log(2 / 0.01) / (2 * n))
    d1 = float(np.max(np.abs(np.searchsorted(np.sort(h_rad), grid, side="right") / n - ref)))
    d2 = float(np.max(np.abs(np.searchsorted(np.sort(h_rej), grid, side="right") / n - ref)))
    ks = stats.ks_2samp(h_rad, h_rej)
    ok = d1 < band and d2 < band and ks.pvalue > 0.01
    return CheckResult("sampler-consistency", ok,
                       f"DKW band {band:.2e}, radial {d1:.2e}, rejection {d2:.2e}, "
                       f"two-sample KS p={ks.pvalue:.3f}")


def check_spacings(cfg: ScenarioConfig) -> CheckResult:
    k = cfg.constants()
    ir = link_distances(iridium_spec(), k)
    st = link_distances(starlink_spec(), k)
    pairs = [(ir.intra_arc_m, 4085e3), (ir.inter_arc_m, 3745e3),
             (st.intra_arc_m, 1977e3), (st.inter_arc_m, 604e3)]
    worst = max(abs(a / b - 1.0) for a, b in pairs)
    return CheckResult("constellation-spacings", worst < 5e-3, f"max rel deviation {worst:.2e}")


def run_validate(cfg: ScenarioConfig, *, residual=wavefront_residual) -> list[CheckResult]:
    seed = cfg.monte_carlo.seed or 0
    return [
        check_series_vs_quadrature(cfg),
        check_series_vs_rician(cfg),
        check_rayleigh_collapse(cfg),
        check_truncation(cfg),
        check_arrival_bracket(cfg, residual=residual),
        check_samplers(cfg, seed=seed),
        check_spacings(cfg),
    ]
