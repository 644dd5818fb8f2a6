"""``isl-fso``: CSV experiment drivers and self-checks.

Exit codes: 0 success, 2 configuration error, 3 convergence or validation
failure.
"""
from __future__ import annotations

import argparse
import sys
from contextlib import nullcontext
from pathlib import Path

from .config import ConfigError, ScenarioConfig, apply_overrides, load_config
from .experiments import (DESIGN_COLUMNS, DISPLACEMENT_COLUMNS, SWEEP_COLUMNS,
                          run_design_search, run_displacement, run_outage_sweep, write_csv)
from .pointing_stats import ConvergenceError
from .validation import run_validate

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_FAILURE = 3


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", type=Path, help="YAML scenario file (defaults if omitted)")
    p.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE",
                   help="override a config value, e.g. transceiver.transmit_power_dbm=30")
    p.add_argument("--output", "-o", type=Path, help="CSV destination (default: stdout)")
    p.add_argument("--workers", type=int, help="worker processes for sweep rows")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="isl-fso",
        description="Outage of inter-satellite optical links under jitter and misalignment.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("outage-sweep", help="analytic (and optional Monte-Carlo) outage sweep")
    _common(p)
    p.add_argument("--seed", type=int, help="master seed; required when Monte-Carlo is enabled")
    p.add_argument("--samples", type=int, help="Monte-Carlo samples per row")
    p.add_argument("--mc", action="store_true", help="enable Monte-Carlo columns")

    p = sub.add_parser("displacement", help="arrival time and misalignment per scenario")
    _common(p)

    p = sub.add_parser("design-search", help="smallest constellation meeting outage targets")
    _common(p)

    p = sub.add_parser("validate", help="run the built-in consistency checks")
    _common(p)
    p.add_argument("--seed", type=int, help="seed for the sampler check")

    p = sub.add_parser("mc-estimate", help="outage sweep with Monte-Carlo estimates")
    _common(p)
    p.add_argument("--seed", type=int, required=True, help="master seed")
    p.add_argument("--samples", type=int, help="samples per row")
    return parser


def _resolve_config(args) -> ScenarioConfig:
    cfg = load_config(args.config)
    overrides = list(args.overrides)
    if args.workers is not None:
        overrides.append(f"workers={args.workers}")
    if getattr(args, "seed", None) is not None:
        overrides.append(f"monte_carlo.seed={args.seed}")
    if getattr(args, "samples", None) is not None:
        overrides.append(f"monte_carlo.samples={args.samples}")
    if args.command == "mc-estimate" or getattr(args, "mc", False):
        overrides.append("monte_carlo.enabled=true")
    cfg = apply_overrides(cfg, overrides) if overrides else cfg
    if args.command == "outage-sweep" and cfg.monte_carlo.enabled and cfg.monte_carlo.seed is None:
        raise ConfigError("Monte-Carlo is enabled: --seed (or monte_carlo.seed) is required")
    return cfg


def _emit(rows, columns, output: Path | None) -> None:
    ctx = open(output, "w", newline="") if output else nullcontext(sys.stdout)
    with ctx as fh:
        write_csv(rows, columns, fh)


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = _resolve_config(args)
    except ConfigError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_CONFIG

    try:
        if args.command in ("outage-sweep", "mc-estimate"):
            rows = run_outage_sweep(cfg)
            _emit(rows, SWEEP_COLUMNS, args.output)
            failed = [r for r in rows if r["status"] != "ok"]
            for r in failed:
                print(f"warning: row axis_value={r['axis_value']} "
                      f"{r['constellation']}/{r['link_type']}: {r['status']}", file=sys.stderr)
            return EXIT_FAILURE if failed else EXIT_OK
        if args.command == "displacement":
            _emit(run_displacement(cfg), DISPLACEMENT_COLUMNS, args.output)
            return EXIT_OK
        if args.command == "design-search":
            _emit(run_design_search(cfg), DESIGN_COLUMNS, args.output)
            return EXIT_OK
        results = run_validate(cfg)
        report = "\n".join(r.line() for r in results) + "\n"
        if args.output:
            args.output.write_text(report)
        print(report, end="")
        return EXIT_OK if all(r.passed for r in results) else EXIT_FAILURE
    except ConvergenceError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
