"""
Outage against transmit power
=============================

Outage for the four reference links with and without the computed
misalignment, checked against Monte-Carlo where the probability is large
enough to estimate.
"""

import matplotlib.pyplot as plt
import numpy as np

from isl_fso import (LinkSelection, LinkType, OpticalTerminal, TransceiverParams, iridium_spec,
                     link_outage, scenario_links, starlink_spec)
from isl_fso.monte_carlo import RngStream, estimate_outage

terminal = OpticalTerminal()
power_dbm = np.arange(14.0, 37.0)

fig, axes = plt.subplots(2, 2, figsize=(10, 8), sharex=True)
for ax, (spec, kind) in zip(axes.flat, [(c, k) for c in (iridium_spec(), starlink_spec())
                                        for k in LinkType]):
    g = scenario_links(spec, LinkSelection(kind))
    for s, style in ((g.displacement_m, "-"), (0.0, "--")):
        p = [link_outage(terminal, TransceiverParams.from_dbm(x), g.chord_distance_m, s)
             for x in power_dbm]
        ax.semilogy(power_dbm, p, style, label=f"s = {s:.1f} m")
    # Monte-Carlo at the lowest powers only; deeper values need far more samples
    for i, x in enumerate(power_dbm[:6:2]):
        m = terminal.pointing_model(g.chord_distance_m, g.displacement_m)
        est = estimate_outage(m, TransceiverParams.from_dbm(x), RngStream(5, i), 1_000_000)
        if est.failures:
            ax.errorbar(x, est.point_estimate,
                        yerr=[[est.point_estimate - est.wilson_ci_low],
                              [est.wilson_ci_high - est.point_estimate]], fmt="ko", ms=3)
    ax.set(title=f"{spec.name} {kind.value}-OP, {g.chord_distance_m / 1e3:.0f} km",
           ylim=(1e-12, 1), xlabel="P_t (dBm)", ylabel="outage")
    ax.legend()
fig.tight_layout()
fig.savefig("outage_vs_power.png", dpi=120)
