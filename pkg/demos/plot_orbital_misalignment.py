"""
Motion-induced misalignment in Walker constellations
====================================================

The transmitter aims at where the receiver *is*; by the time light
arrives the receiver has moved.  The offset grows with link length and is
largest across planes, where the two satellites move in different
directions.
"""

import matplotlib.pyplot as plt
import numpy as np

from isl_fso import LinkSelection, LinkType, iridium_spec, link_distances, scenario_links, starlink_spec
from isl_fso.constellation import pair_link

for spec in (iridium_spec(), starlink_spec()):
    d = link_distances(spec)
    print(f"{spec.name}: {spec.total_satellites} satellites, in-plane arc {d.intra_arc_m / 1e3:.0f} km,"
          f" cross-plane arc {d.inter_arc_m / 1e3:.0f} km")
    for kind in LinkType:
        g = scenario_links(spec, LinkSelection(kind))
        print(f"  {kind.value:5s} chord {g.chord_distance_m / 1e3:7.1f} km  "
              f"tau {g.arrival_time_s * 1e3:6.3f} ms  s {g.displacement_m:6.2f} m")

###############################################################################
# Displacement against separation for two satellites at 550 km

dist = np.linspace(2e5, 4e6, 60)
fig, ax = plt.subplots(figsize=(6, 4))
for kind in LinkType:
    ax.plot(dist / 1e3, [pair_link(550e3, d, kind).displacement_m for d in dist], label=kind.value)
ax.set(xlabel="link distance (km)", ylabel="displacement s (m)")
ax.legend()
fig.tight_layout()
fig.savefig("orbital_misalignment.png", dpi=120)
