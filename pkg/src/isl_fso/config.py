"""Scenario configuration: YAML file <-> validated model.

Every quantity carries its unit in the key name.  Defaults reproduce the
reference transceiver (1550 nm, 0.87 A/W, 20 cm aperture, 8 urad jitter,
12.5 mm waist, 1.6e-14 A^2 noise, 28 dBm, 1 Gbps).
"""
from __future__ import annotations

import hashlib
import json
import math
from pathlib import Path
from typing import Literal

import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from .beam_optics import BeamParams
from .link_budget import OpticalTerminal, TransceiverParams, dbm_to_watts
from .orbital_geometry import PhysicalConstants
from .pointing_stats import TruncationPolicy

SCHEMA_VERSION = 1


class ConfigError(ValueError):
    """Invalid configuration; the message lists offending fields."""


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid", validate_assignment=True)


class TransceiverConfig(_Strict):
    wavelength_nm: float = Field(1550.0, gt=0)
    responsivity_a_per_w: float = Field(0.87, gt=0)
    aperture_radius_m: float = Field(0.2, gt=0)
    jitter_angle_rad: float = Field(8e-6, ge=0)
    beam_waist_m: float = Field(1.25e-2, gt=0)
    noise_variance_a2: float = Field(1.6e-14, gt=0)
    transmit_power_dbm: float = 28.0
    target_rate_bps: float = Field(1e9, gt=0)
    bandwidth_hz: float = Field(1e9, gt=0)


class ScenarioEntry(_Strict):
    """One link to evaluate.

    ``constellation`` is ``iridium``, ``starlink``, ``custom`` (Walker
    parameters given here) or ``pair`` (two satellites at ``altitude_m``
    separated by ``distance_m``, or by the sweep value on a distance sweep).
    """

    constellation: Literal["iridium", "starlink", "custom", "pair"] = "starlink"
    link_type: Literal["intra", "inter"] = "intra"
    altitude_m: float | None = Field(None, gt=0)
    num_planes: int | None = Field(None, ge=1)
    sats_per_plane: int | None = Field(None, ge=1)
    inclination_deg: float | None = None
    pattern: Literal["star", "delta"] | None = None
    phasing_offset: float = 0.0
    distance_m: float | None = Field(None, gt=0)

    @model_validator(mode="after")
    def _check_kind(self):
        if self.constellation == "custom":
            missing = [k for k in ("altitude_m", "num_planes", "sats_per_plane", "pattern")
                       if getattr(self, k) is None]
            if missing:
                raise ValueError(f"custom constellation requires {', '.join(missing)}")
        return self


class MisalignmentConfig(_Strict):
    modes: list[Literal["computed", "fixed-s", "none"]] = ["computed", "none"]
    fixed_displacement_m: float = Field(0.0, ge=0)

    @field_validator("modes")
    @classmethod
    def _nonempty(cls, v):
        if not v or len(set(v)) != len(v):
            raise ValueError("modes must be a non-empty list without duplicates")
        return v


class GeometryConfig(_Strict):
    distance_source: Literal["chord", "arc"] = "chord"
    earth_radius_m: float = Field(6.371e6, gt=0)
    mu_earth_m3_s2: float = Field(3.986004418e14, gt=0)
    light_speed_m_s: float = Field(299_792_458.0, gt=0)
    arrival_tol_s: float = Field(1e-12, gt=0)


class SweepConfig(_Strict):
    axis: Literal["transmit_power_dbm", "beam_waist_m", "target_rate_bps", "distance_m"] = \
        "transmit_power_dbm"
    values: list[float] = Field(default_factory=lambda: [float(v) for v in range(20, 37)])

    @field_validator("values")
    @classmethod
    def _increasing(cls, v):
        if not v:
            raise ValueError("sweep grid is empty")
        if any(not math.isfinite(x) for x in v):
            raise ValueError("sweep grid must be finite")
        if any(b <= a for a, b in zip(v, v[1:])):
            raise ValueError("sweep grid must be strictly increasing")
        return v


class TruncationConfig(_Strict):
    epsilon: float = Field(1e-12, gt=0, lt=1)
    n_init: int = Field(64, ge=2)
    n_max_cap: int = Field(10_000_000, ge=2)


class MonteCarloConfig(_Strict):
    enabled: bool = False
    samples: int = Field(1_000_000, ge=1)
    seed: int | None = Field(None, ge=0)


class DesignSearchConfig(_Strict):
    targets: list[float] = [1e-2, 1e-4, 1e-6, 1e-8]
    altitude_m: float = Field(550e3, gt=0)
    inclination_deg: float = 53.0
    max_planes: int = Field(100, ge=1)
    max_sats_per_plane: int = Field(40, ge=2)

    @field_validator("targets")
    @classmethod
    def _in_range(cls, v):
        if not v or any(not 0 < x <= 1 for x in v):
            raise ValueError("targets must lie in (0, 1]")
        return v


class ScenarioConfig(_Strict):
    transceiver: TransceiverConfig = Field(default_factory=TransceiverConfig)
    scenarios: list[ScenarioEntry] = Field(default_factory=lambda: [ScenarioEntry()])
    misalignment: MisalignmentConfig = Field(default_factory=MisalignmentConfig)
    geometry: GeometryConfig = Field(default_factory=GeometryConfig)
    sweep: SweepConfig = Field(default_factory=SweepConfig)
    truncation: TruncationConfig = Field(default_factory=TruncationConfig)
    monte_carlo: MonteCarloConfig = Field(default_factory=MonteCarloConfig)
    design_search: DesignSearchConfig = Field(default_factory=DesignSearchConfig)
    workers: int = Field(1, ge=1)

    @model_validator(mode="after")
    def _check_axis(self):
        if self.sweep.axis == "distance_m":
            bad = [i for i, s in enumerate(self.scenarios) if s.constellation != "pair"]
            if bad:
                raise ValueError(f"distance_m sweeps need constellation 'pair' (scenarios {bad})")
        for i, s in enumerate(self.scenarios):
            if s.constellation == "pair" and s.altitude_m is None:
                raise ValueError(f"scenario {i}: pair geometry requires altitude_m")
            if (s.constellation == "pair" and s.distance_m is None
                    and self.sweep.axis != "distance_m"):
                raise ValueError(f"scenario {i}: pair geometry requires distance_m")
        return self

    # -- conversions to library objects ------------------------------------

    def terminal(self, beam_waist_m: float | None = None) -> OpticalTerminal:
        tc = self.transceiver
        beam = BeamParams(waist_radius_m=tc.beam_waist_m if beam_waist_m is None else beam_waist_m,
                          wavelength_m=tc.wavelength_nm * 1e-9)
        return OpticalTerminal(beam, tc.aperture_radius_m, tc.jitter_angle_rad)

    def transceiver_params(self, transmit_power_dbm: float | None = None,
                           target_rate_bps: float | None = None) -> TransceiverParams:
        tc = self.transceiver
        p = tc.transmit_power_dbm if transmit_power_dbm is None else transmit_power_dbm
        return TransceiverParams(
            responsivity_a_per_w=tc.responsivity_a_per_w,
            transmit_power_w=dbm_to_watts(p),
            noise_variance_a2=tc.noise_variance_a2,
            bandwidth_hz=tc.bandwidth_hz,
            target_rate_bps=tc.target_rate_bps if target_rate_bps is None else target_rate_bps,
        )

    def constants(self) -> PhysicalConstants:
        g = self.geometry
        return PhysicalConstants(g.mu_earth_m3_s2, g.light_speed_m_s, g.earth_radius_m)

    def policy(self) -> TruncationPolicy:
        t = self.truncation
        return TruncationPolicy(t.epsilon, t.n_init, t.n_max_cap)

    # -- serialization ------------------------------------------------------

    def to_dict(self) -> dict:
        return self.model_dump(mode="json")

    def to_yaml(self) -> str:
        return yaml.safe_dump(self.to_dict(), sort_keys=False)

    def config_hash(self) -> str:
        """Digest of everything that affects results (``workers`` does not)."""
        data = self.to_dict()
        data.pop("workers")
        canon = json.dumps(data, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canon.encode()).hexdigest()[:16]


def _format_errors(err: ValidationError) -> str:
    lines = []
    for e in err.errors():
        loc = ".".join(str(p) for p in e["loc"]) or "<root>"
        lines.append(f"{loc}: {e['msg']}")
    return "invalid configuration:\n  " + "\n  ".join(lines)


def config_from_dict(data: dict | None) -> ScenarioConfig:
    try:
        return ScenarioConfig.model_validate(data or {})
    except ValidationError as err:
        raise ConfigError(_format_errors(err)) from None


def parse_config(text: str) -> ScenarioConfig:
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as err:
        raise ConfigError(f"config is not valid YAML: {err}") from None
    if data is not None and not isinstance(data, dict):
        raise ConfigError("config root must be a mapping")
    return config_from_dict(data)


def load_config(path: str | Path | None) -> ScenarioConfig:
    if path is None:
        return ScenarioConfig()
    try:
        text = Path(path).read_text()
    except OSError as err:
        raise ConfigError(f"cannot read config {path}: {err}") from None
    return parse_config(text)


def apply_overrides(cfg: ScenarioConfig, assignments: list[str]) -> ScenarioConfig:
    """Apply ``dotted.key=value`` overrides; values are parsed as YAML scalars."""
    data = cfg.to_dict()
    for item in assignments:
        key, sep, raw = item.partition("=")
        if not sep or not key:
            raise ConfigError(f"override {item!r} is not of the form key=value")
        node = data
        parts = key.split(".")
        for p in parts[:-1]:
            if isinstance(node, list):
                node = node[int(p)]
            elif p in node:
                node = node[p]
            else:
                raise ConfigError(f"{key}: unknown section {p!r}")
        try:
            value = yaml.safe_load(raw)
        except yaml.YAMLError:
            value = raw
        last = parts[-1]
        if isinstance(node, list):
            node[int(last)] = value
        else:
            node[last] = value
    return config_from_dict(data)
