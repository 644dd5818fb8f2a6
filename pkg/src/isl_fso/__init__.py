"""Outage analysis for inter-satellite free-space optical links.

Gaussian-beam aperture gain, Rician pointing statistics with static
misalignment, orbital arrival-time geometry, Walker constellations and
Monte-Carlo cross-checks.
"""
from .beam_optics import ApertureChannel, BeamParams, aperture_params, beam_radius, channel_gain
from .constellation import (ConstellationSpec, LinkSelection, LinkType, WalkerPattern,
                            design_search, iridium_spec, link_distances, scenario_links,
                            starlink_spec)
from .link_budget import OpticalTerminal, TransceiverParams, link_outage, outage_probability
from .monte_carlo import RngStream, estimate_outage
from .orbital_geometry import OrbitState, PhysicalConstants, link_displacement, solve_arrival_time
from .pointing_stats import (PointingModel, TruncationPolicy, gain_cdf_series, gain_pdf,
                             rayleigh_gain_cdf, truncation_index)

__version__ = "0.1.0"

__all__ = [
    "ApertureChannel", "BeamParams", "ConstellationSpec", "LinkSelection", "LinkType",
    "OpticalTerminal", "OrbitState", "PhysicalConstants", "PointingModel", "RngStream",
    "TransceiverParams", "TruncationPolicy", "WalkerPattern", "aperture_params", "beam_radius",
    "channel_gain", "design_search", "estimate_outage", "gain_cdf_series", "gain_pdf",
    "iridium_spec", "link_displacement", "link_distances", "link_outage", "outage_probability",
    "rayleigh_gain_cdf", "scenario_links", "solve_arrival_time", "starlink_spec",
    "truncation_index",
]
