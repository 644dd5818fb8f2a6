"""Walker constellations, ISL pair selection and constellation sizing."""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .link_budget import OpticalTerminal, TransceiverParams, link_outage
from .orbital_geometry import (DEFAULT_CONSTANTS, LinkGeometry, OrbitState,
                               PhysicalConstants, cartesian_to_spherical,
                               circular_angular_rate, link_displacement,
                               to_receiver_centric)
from .pointing_stats import TruncationPolicy


class WalkerPattern(str, enum.Enum):
    STAR = "star"
    DELTA = "delta"


class LinkType(str, enum.Enum):
    INTRA_OP = "intra"
    INTER_OP = "inter"


@dataclass(frozen=True)
class ConstellationSpec:
    """Walker constellation of ``num_planes`` planes with ``sats_per_plane`` each.

    ``phasing_offset`` shifts plane ``p`` along-track by
    ``p * phasing_offset`` in-plane spacings.
    """

    altitude_m: float
    num_planes: int
    sats_per_plane: int
    inclination_rad: float
    pattern: WalkerPattern
    phasing_offset: float = 0.0
    name: str = "custom"

    def __post_init__(self):
        if self.num_planes < 1 or self.sats_per_plane < 1:
            raise ValueError("num_planes and sats_per_plane must be >= 1")
        if not self.altitude_m > 0:
            raise ValueError("altitude_m must be > 0")
        object.__setattr__(self, "pattern", WalkerPattern(self.pattern))

    @property
    def raan_span_rad(self) -> float:
        return math.pi if self.pattern is WalkerPattern.STAR else 2.0 * math.pi

    @property
    def total_satellites(self) -> int:
        return self.num_planes * self.sats_per_plane

    def orbit_radius_m(self, k: PhysicalConstants = DEFAULT_CONSTANTS) -> float:
        return k.earth_radius_m + self.altitude_m

    def raan_rad(self, plane: int) -> float:
        return plane * self.raan_span_rad / self.num_planes

    def anomaly_rad(self, plane: int, slot: int) -> float:
        spacing = 2.0 * math.pi / self.sats_per_plane
        return slot * spacing + plane * self.phasing_offset * spacing


def iridium_spec() -> ConstellationSpec:
    return ConstellationSpec(altitude_m=781e3, num_planes=6, sats_per_plane=11,
                             inclination_rad=math.radians(86.4),
                             pattern=WalkerPattern.STAR, name="iridium")


def starlink_spec() -> ConstellationSpec:
    return ConstellationSpec(altitude_m=550e3, num_planes=72, sats_per_plane=22,
                             inclination_rad=math.radians(53.0),
                             pattern=WalkerPattern.DELTA, name="starlink")


CONSTELLATIONS = {"iridium": iridium_spec, "starlink": starlink_spec}


@dataclass(frozen=True)
class LinkSelection:
    link_type: LinkType
    tx_index: tuple[int, int] = (0, 0)
    rx_index: tuple[int, int] | None = None

    def __post_init__(self):
        object.__setattr__(self, "link_type", LinkType(self.link_type))
        p, q = self.tx_index
        if self.rx_index is None:
            rx = (p, q + 1) if self.link_type is LinkType.INTRA_OP else (p + 1, q)
            object.__setattr__(self, "rx_index", rx)
        rp, rq = self.rx_index
        if self.link_type is LinkType.INTRA_OP and rp != p:
            raise ValueError("intra-OP satellites must share a plane")
        if self.link_type is LinkType.INTER_OP and rp == p:
            raise ValueError("inter-OP satellites must be in different planes")


def _plane_basis(raan: float, inclination: float) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Node direction, in-plane 90 deg direction and orbit normal in ECI."""
    co, so = math.cos(raan), math.sin(raan)
    ci, si = math.cos(inclination), math.sin(inclination)
    node = np.array([co, so, 0.0])
    along = np.array([-so * ci, co * ci, si])
    normal = np.array([so * si, -co * si, ci])
    return node, along, normal


def eci_position(spec: ConstellationSpec, radius_m: float, raan: float, anomaly: float) -> np.ndarray:
    node, along, _ = _plane_basis(raan, spec.inclination_rad)
    return radius_m * (math.cos(anomaly) * node + math.sin(anomaly) * along)


def plane_normal(spec: ConstellationSpec, plane: int) -> np.ndarray:
    return _plane_basis(spec.raan_rad(plane), spec.inclination_rad)[2]


def satellite_eci(spec: ConstellationSpec, plane: int, slot: int,
                  k: PhysicalConstants = DEFAULT_CONSTANTS) -> tuple[np.ndarray, np.ndarray]:
    """ECI position and orbit normal of one satellite at epoch."""
    r = spec.orbit_radius_m(k)
    raan = spec.raan_rad(plane)
    pos = eci_position(spec, r, raan, spec.anomaly_rad(plane, slot))
    return pos, plane_normal(spec, plane)


def generate_states(spec: ConstellationSpec,
                    k: PhysicalConstants = DEFAULT_CONSTANTS) -> list[OrbitState]:
    """ECI spherical states of all satellites, plane-major order."""
    r = spec.orbit_radius_m(k)
    omega = circular_angular_rate(r, k)
    states = []
    for p in range(spec.num_planes):
        for q in range(spec.sats_per_plane):
            pos, _ = satellite_eci(spec, p, q, k)
            _, theta, psi = cartesian_to_spherical(pos)
            states.append(OrbitState(r, theta, psi, omega))
    return states


def generate_positions(spec: ConstellationSpec,
                       k: PhysicalConstants = DEFAULT_CONSTANTS) -> np.ndarray:
    """ECI positions with shape (num_planes, sats_per_plane, 3)."""
    return np.array([[satellite_eci(spec, p, q, k)[0] for q in range(spec.sats_per_plane)]
                     for p in range(spec.num_planes)])


@dataclass(frozen=True)
class LinkDistances:
    intra_arc_m: float
    intra_chord_m: float
    inter_arc_m: float
    inter_chord_m: float


def link_distances(spec: ConstellationSpec,
                   k: PhysicalConstants = DEFAULT_CONSTANTS) -> LinkDistances:
    """In-plane and equator-crossing neighbor spacings (arc and chord)."""
    r = spec.orbit_radius_m(k)
    d_in = 2.0 * math.pi / spec.sats_per_plane
    d_cross = spec.raan_span_rad / spec.num_planes
    return LinkDistances(
        intra_arc_m=r * d_in,
        intra_chord_m=2.0 * r * math.sin(d_in / 2.0),
        inter_arc_m=r * d_cross,
        inter_chord_m=2.0 * r * math.sin(d_cross / 2.0),
    )


def clears_earth(p1: np.ndarray, p2: np.ndarray, radius_m: float) -> bool:
    """True if the segment between two positions stays above ``radius_m``."""
    d = p2 - p1
    t = np.clip(-float(p1 @ d) / float(d @ d), 0.0, 1.0)
    return float(np.linalg.norm(p1 + t * d)) > radius_m


def _geometry_from_eci(tx_pos, rx_pos, rx_normal, k, tol_s) -> LinkGeometry:
    tx, rx = to_receiver_centric(tx_pos, rx_pos, rx_normal, k)
    return link_displacement(tx, rx, k, tol_s)


def scenario_links(spec: ConstellationSpec, selection: LinkSelection,
                   k: PhysicalConstants = DEFAULT_CONSTANTS, tol_s: float = 1e-12,
                   *, co_phased: bool = True) -> LinkGeometry:
    """Distance and motion-induced displacement of one ISL of the constellation.

    Inter-OP receivers are placed co-phased with the transmitter (same
    along-track anomaly) when ``co_phased`` is set.
    """
    (tp, tq), (rp, rq) = selection.tx_index, selection.rx_index
    r = spec.orbit_radius_m(k)
    tx_pos = eci_position(spec, r, spec.raan_rad(tp), spec.anomaly_rad(tp, tq))
    rx_anomaly = spec.anomaly_rad(rp, rq)
    if selection.link_type is LinkType.INTER_OP and co_phased:
        rx_anomaly = spec.anomaly_rad(tp, tq)
    rx_pos = eci_position(spec, r, spec.raan_rad(rp), rx_anomaly)
    return _geometry_from_eci(tx_pos, rx_pos, plane_normal(spec, rp), k, tol_s)


def pair_link(altitude_m: float, distance_m: float, link_type: LinkType,
              inclination_rad: float = math.radians(53.0),
              k: PhysicalConstants = DEFAULT_CONSTANTS, tol_s: float = 1e-12) -> LinkGeometry:
    """Two satellites at one altitude separated by the chord ``distance_m``.

    Intra-OP: same plane, receiver ahead.  Inter-OP: co-phased at the
    ascending node on planes whose RAAN differs by the matching angle.
    """
    r = k.earth_radius_m + altitude_m
    if not 0 < distance_m <= 2 * r:
        raise ValueError("distance_m must lie in (0, 2 r]")
    angle = 2.0 * math.asin(distance_m / (2.0 * r))
    spec = ConstellationSpec(altitude_m, 1, 1, inclination_rad, WalkerPattern.DELTA)
    tx_pos = eci_position(spec, r, 0.0, 0.0)
    if LinkType(link_type) is LinkType.INTRA_OP:
        rx_pos = eci_position(spec, r, 0.0, angle)
        normal = _plane_basis(0.0, inclination_rad)[2]
    else:
        rx_pos = eci_position(spec, r, angle, 0.0)
        normal = _plane_basis(angle, inclination_rad)[2]
    return _geometry_from_eci(tx_pos, rx_pos, normal, k, tol_s)


@dataclass(frozen=True)
class DesignResult:
    num_planes: int
    sats_per_plane: int
    intra_outage: float
    inter_outage: float
    metadata: dict = field(default_factory=dict, compare=False)

    @property
    def total_satellites(self) -> int:
        return self.num_planes * self.sats_per_plane


class InfeasibleDesign(RuntimeError):
    pass


def _walker_delta(altitude_m, planes, sats, inclination_rad) -> ConstellationSpec:
    return ConstellationSpec(altitude_m, planes, sats, inclination_rad, WalkerPattern.DELTA)


def intra_outage_by_q(altitude_m: float, sats_per_plane: int, t: TransceiverParams,
                      terminal: OpticalTerminal, policy: TruncationPolicy,
                      inclination_rad: float, k: PhysicalConstants) -> float:
    """Outage of the intra-OP neighbor link; 1 if blocked by the Earth."""
    if sats_per_plane < 2:
        return 1.0
    spec = _walker_delta(altitude_m, 1, sats_per_plane, inclination_rad)
    r = spec.orbit_radius_m(k)
    if math.cos(math.pi / sats_per_plane) * r <= k.earth_radius_m:
        return 1.0
    geom = scenario_links(spec, LinkSelection(LinkType.INTRA_OP), k)
    return link_outage(terminal, t, geom.chord_distance_m, geom.displacement_m, policy)


def inter_outage_by_p(altitude_m: float, num_planes: int, t: TransceiverParams,
                      terminal: OpticalTerminal, policy: TruncationPolicy,
                      inclination_rad: float, k: PhysicalConstants) -> float:
    """Outage of the co-phased inter-OP neighbor link; 1 if there is no such link."""
    if num_planes < 2:
        return 1.0
    spec = _walker_delta(altitude_m, num_planes, 1, inclination_rad)
    r = spec.orbit_radius_m(k)
    if math.cos(math.pi / num_planes) * r <= k.earth_radius_m:
        return 1.0
    geom = scenario_links(spec, LinkSelection(LinkType.INTER_OP), k)
    return link_outage(terminal, t, geom.chord_distance_m, geom.displacement_m, policy)


def design_search(altitude_m: float, outage_target: float, t: TransceiverParams,
                  policy: TruncationPolicy = TruncationPolicy(), *,
                  terminal: OpticalTerminal = OpticalTerminal(),
                  max_planes: int = 100, max_sats_per_plane: int = 40,
                  inclination_rad: float = math.radians(53.0),
                  k: PhysicalConstants = DEFAULT_CONSTANTS,
                  _cache: dict | None = None) -> DesignResult:
    """Smallest Walker-Delta constellation whose neighbor ISLs meet ``outage_target``.

    Both the intra-OP and the inter-OP link (with computed misalignment) must
    have outage ``<= outage_target``.  The grid is ``1 <= P <= max_planes``,
    ``2 <= Q <= max_sats_per_plane``; the smallest ``P * Q`` wins and ties go
    to fewer planes.  A single plane has no inter-OP link, and a link whose
    chord passes through the Earth is treated as always in outage.
    """
    if not 0 < outage_target <= 1:
        raise ValueError("outage_target must lie in (0, 1]")
    cache = {} if _cache is None else _cache
    if "intra" not in cache:
        cache["intra"] = {q: intra_outage_by_q(altitude_m, q, t, terminal, policy,
                                               inclination_rad, k)
                          for q in range(2, max_sats_per_plane + 1)}
        cache["inter"] = {p: inter_outage_by_p(altitude_m, p, t, terminal, policy,
                                               inclination_rad, k)
                          for p in range(1, max_planes + 1)}
    intra, inter = cache["intra"], cache["inter"]
    best = None
    for p in range(1, max_planes + 1):
        if inter[p] > outage_target:
            continue
        for q in range(2, max_sats_per_plane + 1):
            if intra[q] > outage_target:
                continue
            key = (p * q, p)
            if best is None or key < best[0]:
                best = (key, p, q)
    meta = {"altitude_m": altitude_m, "max_planes": max_planes,
            "max_sats_per_plane": max_sats_per_plane, "pattern": "delta",
            "inclination_deg": math.degrees(inclination_rad),
            "tie_break": "min total, then fewer planes"}
    if best is None:
        raise InfeasibleDesign(f"no (P, Q) on the {max_planes}x{max_sats_per_plane - 1} grid "
                               f"meets outage {outage_target:g}")
    _, p, q = best
    return DesignResult(p, q, intra[q], inter[p], meta)
