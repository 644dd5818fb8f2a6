"""Experiment drivers behind the command-line tool.

Each driver takes a :class:`~isl_fso.config.ScenarioConfig` and returns a list
of row dicts in a fixed column order; :func:`write_csv` renders them.  Rows
depend only on the config (and its seed), so output is byte-stable.
"""
from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

from .config import SCHEMA_VERSION, ScenarioConfig, ScenarioEntry
from .constellation import (CONSTELLATIONS, ConstellationSpec, InfeasibleDesign,
                            LinkSelection, LinkType, design_search, link_distances,
                            pair_link, scenario_links)
from .link_budget import outage_probability
from .monte_carlo import RngStream, estimate_outage
from .orbital_geometry import LinkGeometry
from .pointing_stats import ConvergenceError, truncation_index

SWEEP_COLUMNS = [
    "axis_value", "link_type", "constellation", "distance_m", "displacement_m", "tau_s",
    "outage_analytic", "outage_mc", "mc_ci_low", "mc_ci_high", "trunc_N", "config_hash",
    "misalignment_mode", "status", "schema_version",
]
DISPLACEMENT_COLUMNS = [
    "constellation", "link_type", "altitude_m", "distance_m", "arc_m", "tau_s",
    "tau_minus_s", "displacement_m", "nu", "config_hash", "schema_version",
]
DESIGN_COLUMNS = [
    "target", "num_planes", "sats_per_plane", "total", "intra_outage", "inter_outage",
    "status", "config_hash", "schema_version",
]


def fmt_prob(x) -> str:
    if x is None:
        return ""
    return "nan" if math.isnan(x) else f"{x:.10e}"


def fmt_num(x) -> str:
    if x is None:
        return ""
    return repr(float(x))


def constellation_spec(entry: ScenarioEntry) -> ConstellationSpec:
    if entry.constellation in CONSTELLATIONS:
        spec = CONSTELLATIONS[entry.constellation]()
        overrides = {k: getattr(entry, k) for k in ("altitude_m", "num_planes", "sats_per_plane")
                     if getattr(entry, k) is not None}
        if entry.inclination_deg is not None:
            overrides["inclination_rad"] = math.radians(entry.inclination_deg)
        if overrides or entry.phasing_offset:
            spec = replace(spec, phasing_offset=entry.phasing_offset, **overrides)
        return spec
    return ConstellationSpec(
        altitude_m=entry.altitude_m,
        num_planes=entry.num_planes,
        sats_per_plane=entry.sats_per_plane,
        inclination_rad=math.radians(53.0 if entry.inclination_deg is None
                                     else entry.inclination_deg),
        pattern=entry.pattern,
        phasing_offset=entry.phasing_offset,
    )


@dataclass(frozen=True)
class ScenarioGeometry:
    geometry: LinkGeometry
    channel_distance_m: float
    arc_m: float | None


def scenario_geometry(cfg: ScenarioConfig, entry: ScenarioEntry,
                      distance_m: float | None = None) -> ScenarioGeometry:
    k = cfg.constants()
    tol = cfg.geometry.arrival_tol_s
    if entry.constellation == "pair":
        incl = math.radians(53.0 if entry.inclination_deg is None else entry.inclination_deg)
        d = entry.distance_m if distance_m is None else distance_m
        geom = pair_link(entry.altitude_m, d, LinkType(entry.link_type), incl, k, tol)
        r = k.earth_radius_m + entry.altitude_m
        arc = 2.0 * r * math.asin(d / (2.0 * r))
    else:
        spec = constellation_spec(entry)
        geom = scenario_links(spec, LinkSelection(LinkType(entry.link_type)), k, tol)
        dist = link_distances(spec, k)
        arc = dist.intra_arc_m if entry.link_type == "intra" else dist.inter_arc_m
    channel_d = arc if cfg.geometry.distance_source == "arc" else geom.chord_distance_m
    return ScenarioGeometry(geom, channel_d, arc)


def _row_tasks(cfg: ScenarioConfig):
    idx = 0
    for gi, x in enumerate(cfg.sweep.values):
        for si, entry in enumerate(cfg.scenarios):
            for mode in cfg.misalignment.modes:
                yield idx, gi, x, si, entry, mode
                idx += 1


def _sweep_row(cfg: ScenarioConfig, task, cfg_hash: str) -> dict:
    idx, _, x, _, entry, mode = task
    axis = cfg.sweep.axis
    row = {c: None for c in SWEEP_COLUMNS}
    row.update(axis_value=fmt_num(x), link_type=entry.link_type,
               constellation=entry.constellation, config_hash=cfg_hash,
               misalignment_mode=mode, schema_version=str(SCHEMA_VERSION), status="ok")
    try:
        sg = scenario_geometry(cfg, entry, x if axis == "distance_m" else None)
    except Exception as err:  # geometry failures are per-row, not fatal
        row.update(status=f"geometry error: {err}")
        return {k: ("" if v is None else v) for k, v in row.items()}
    if mode == "computed":
        s = sg.geometry.displacement_m
    elif mode == "fixed-s":
        s = cfg.misalignment.fixed_displacement_m
    else:
        s = 0.0
    terminal = cfg.terminal(x if axis == "beam_waist_m" else None)
    t = cfg.transceiver_params(
        transmit_power_dbm=x if axis == "transmit_power_dbm" else None,
        target_rate_bps=x if axis == "target_rate_bps" else None,
    )
    model = terminal.pointing_model(sg.channel_distance_m, s)
    policy = cfg.policy()
    row.update(distance_m=fmt_num(sg.channel_distance_m), displacement_m=fmt_num(s),
               tau_s=fmt_num(sg.geometry.arrival_time_s))
    try:
        row["trunc_N"] = str(truncation_index(model.nu, policy))
        row["outage_analytic"] = fmt_prob(outage_probability(model, t, policy))
    except ConvergenceError as err:
        row.update(outage_analytic="nan", trunc_N="", status=f"convergence failure: {err}")
    mc = cfg.monte_carlo
    if mc.enabled:
        est = estimate_outage(model, t, RngStream(mc.seed, idx), mc.samples)
        row.update(outage_mc=fmt_prob(est.point_estimate), mc_ci_low=fmt_prob(est.wilson_ci_low),
                   mc_ci_high=fmt_prob(est.wilson_ci_high))
    return {k: ("" if v is None else v) for k, v in row.items()}


def _sweep_row_star(args):
    return _sweep_row(*args)


def run_outage_sweep(cfg: ScenarioConfig) -> list[dict]:
    """One row per (grid point, scenario, misalignment mode), in that nesting order."""
    if cfg.monte_carlo.enabled and cfg.monte_carlo.seed is None:
        raise ValueError("Monte-Carlo runs need a seed")
    cfg_hash = cfg.config_hash()
    jobs = [(cfg, task, cfg_hash) for task in _row_tasks(cfg)]
    if cfg.workers > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            return list(pool.map(_sweep_row_star, jobs, chunksize=4))
    return [_sweep_row(*job) for job in jobs]


def run_displacement(cfg: ScenarioConfig) -> list[dict]:
    cfg_hash = cfg.config_hash()
    terminal = cfg.terminal()
    rows = []
    for entry in cfg.scenarios:
        d = None
        if entry.constellation == "pair" and entry.distance_m is None:
            d = cfg.sweep.values[0]
        sg = scenario_geometry(cfg, entry, d)
        g = sg.geometry
        model = terminal.pointing_model(sg.channel_distance_m, g.displacement_m)
        rows.append({
            "constellation": entry.constellation,
            "link_type": entry.link_type,
            "altitude_m": fmt_num(g.rx_state.radius_m - cfg.geometry.earth_radius_m),
            "distance_m": fmt_num(g.chord_distance_m),
            "arc_m": fmt_num(sg.arc_m),
            "tau_s": fmt_num(g.arrival_time_s),
            "tau_minus_s": fmt_num(g.bracket_upper_s),
            "displacement_m": fmt_num(g.displacement_m),
            "nu": fmt_num(model.nu),
            "config_hash": cfg_hash,
            "schema_version": str(SCHEMA_VERSION),
        })
    return rows


def run_design_search(cfg: ScenarioConfig) -> list[dict]:
    ds = cfg.design_search
    cfg_hash = cfg.config_hash()
    cache: dict = {}
    rows = []
    for target in ds.targets:
        row = {"target": fmt_prob(target), "config_hash": cfg_hash,
               "schema_version": str(SCHEMA_VERSION)}
        try:
            res = design_search(ds.altitude_m, target, cfg.transceiver_params(), cfg.policy(),
                                terminal=cfg.terminal(), max_planes=ds.max_planes,
                                max_sats_per_plane=ds.max_sats_per_plane,
                                inclination_rad=math.radians(ds.inclination_deg),
                                k=cfg.constants(), _cache=cache)
            row.update(num_planes=str(res.num_planes), sats_per_plane=str(res.sats_per_plane),
                       total=str(res.total_satellites), intra_outage=fmt_prob(res.intra_outage),
                       inter_outage=fmt_prob(res.inter_outage), status="ok")
        except InfeasibleDesign as err:
            row.update(num_planes="", sats_per_plane="", total="", intra_outage="",
                       inter_outage="", status=f"infeasible: {err}")
        rows.append(row)
    return rows


def write_csv(rows: list[dict], columns: list[str], stream=None) -> str:
    buf = io.StringIO() if stream is None else stream
    writer = csv.DictWriter(buf, fieldnames=columns, lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({c: row.get(c, "") for c in columns})
    return buf.getvalue() if stream is None else ""
