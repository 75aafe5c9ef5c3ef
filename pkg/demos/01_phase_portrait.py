"""Stroboscopic portrait of the modulated pendulum and orbit labels.

Strobe once per drive period for a grid of seeds, then label the two
initial conditions used throughout the quantum runs.
"""

import numpy as np

from cavity_sse import SimParams, classify_orbit, stroboscopic_portrait
from cavity_sse.io import write_csv

prm = SimParams(xi=1.2, epsilon=0.2, D=0.0)

# a coarse seed grid over one well plus the two reference seeds
xs = np.linspace(-np.pi, np.pi, 9, endpoint=False)
ps = np.linspace(-2.0, 2.0, 5)
seeds = [(0.0, 1.0), (-2.5, 1.0)] + [(x, p) for p in ps for x in xs]
pts = stroboscopic_portrait(seeds, 300, prm)
print("strobe array (strobes, seeds, [x, p]):", pts.shape)

rows = ((k, j, pts[k, j, 0], pts[k, j, 1]) for k in range(pts.shape[0]) for j in range(pts.shape[1]))
write_csv("portrait_demo.csv", ["strobe_index", "seed_index", "x", "p"], rows)

for x0, p0 in seeds[:2]:
    oc = classify_orbit(x0, p0, prm)
    print(f"({x0:+.1f}, {p0:.1f}) -> {oc.label:8s} separation growth {oc.exponent:.3f} per period")

# the regular seed sits on a period-one resonance: small momentum excursion
p_reg = pts[:, 0, 1]
print("regular seed momentum range:", p_reg.min().round(3), p_reg.max().round(3))
# the chaotic seed wanders through the sea, both signs of p
p_ch = pts[:, 1, 1]
print("chaotic seed momentum range:", p_ch.min().round(3), p_ch.max().round(3))
