"""
Sizing a constellation for an outage target
===========================================

Denser planes shorten links and cut both path loss and misalignment; the
search returns the smallest Walker-Delta grid at 550 km whose neighbour
links meet each target.
"""

import matplotlib.pyplot as plt

from isl_fso import OpticalTerminal, TransceiverParams, design_search

targets = [1e-2, 1e-4, 1e-6, 1e-8]
cache = {}  # per-Q and per-P outages are shared between targets
results = [design_search(550e3, x, TransceiverParams(), terminal=OpticalTerminal(), _cache=cache)
           for x in targets]
for x, r in zip(targets, results):
    print(f"target {x:g}: {r.num_planes} planes x {r.sats_per_plane} = {r.total_satellites}")

fig, ax = plt.subplots(figsize=(6, 4))
labels = [f"{x:g}" for x in targets]
ax.bar(labels, [r.total_satellites for r in results], label="satellites")
ax.bar(labels, [r.num_planes for r in results], label="planes")
ax.set(xlabel="outage target", ylabel="count")
ax.legend()
fig.tight_layout()
fig.savefig("design_search.png", dpi=120)
