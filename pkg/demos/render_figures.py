"""Render figures from CSV written by ``isl-fso``.

The command-line tool only writes CSV; this script turns an outage sweep
or a design search into a PNG::

    isl-fso outage-sweep --config demos/configs/starlink_power.yaml -o sweep.csv
    python demos/render_figures.py sweep.csv sweep.png
"""
import argparse
import csv
from collections import defaultdict

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402


def render_sweep(rows, ax):
    series = defaultdict(list)
    for r in rows:
        if r["outage_analytic"] in ("", "nan"):
            continue
        key = f"{r['constellation']} {r['link_type']} ({r['misalignment_mode']})"
        series[key].append((float(r["axis_value"]), float(r["outage_analytic"]),
                            r["outage_mc"], r["mc_ci_low"], r["mc_ci_high"]))
    for key, pts in series.items():
        x = [p[0] for p in pts]
        line, = ax.semilogy(x, [max(p[1], 1e-300) for p in pts], label=key)
        mc = [(p[0], float(p[2]), float(p[3]), float(p[4])) for p in pts if p[2] and float(p[2]) > 0]
        if mc:
            ax.errorbar([m[0] for m in mc], [m[1] for m in mc],
                        yerr=[[m[1] - m[2] for m in mc], [m[3] - m[1] for m in mc]],
                        fmt="o", ms=3, color=line.get_color())
    ax.set_ylabel("outage probability")
    ax.legend(fontsize=8)


def render_design(rows, ax):
    ok = [r for r in rows if r["status"] == "ok"]
    labels = [r["target"] for r in ok]
    ax.bar(labels, [int(r["total"]) for r in ok], label="satellites")
    ax.bar(labels, [int(r["num_planes"]) for r in ok], label="planes")
    ax.set_xlabel("outage target")
    ax.legend()


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("csv")
    parser.add_argument("png")
    parser.add_argument("--xlabel", default=None)
    args = parser.parse_args(argv)
    with open(args.csv, newline="") as fh:
        rows = list(csv.DictReader(fh))
    fig, ax = plt.subplots(figsize=(7, 5))
    if rows and "num_planes" in rows[0]:
        render_design(rows, ax)
    else:
        render_sweep(rows, ax)
        ax.set_xlabel(args.xlabel or "sweep value")
    fig.tight_layout()
    fig.savefig(args.png, dpi=120)


if __name__ == "__main__":
    main()
