"""Nested shells of the toy ring's reflection group and an epsilon cloud of its limit set."""
import sys

import numpy as np

from spunpearls.io import export_cloud, slice_cloud
from spunpearls.necklace import toy_ring
from spunpearls.orbit import (cloud, containment_margin, count_balls, generators_from_necklace, grow,
                              invariance_defect)

ring = toy_ring()
gens = generators_from_necklace(ring)

f = grow(gens, 1e-300, 5)
print("depth   balls   max radius   nesting margin")
for d in range(6):
    r = f.radii[f.depths == d] * gens.scale
    m = containment_margin(f, d - 1) if d else float("nan")
    print(f"{d:5d} {len(r):7d} {r.max():12.4g} {m:16.3f}")
print("word counts:", count_balls(gens, 5))

eps = 1e-3
pts = cloud(grow(gens, eps, 20))
print(f"\neps = {eps}: {len(pts)} points, invariance defect {invariance_defect(pts, gens):.2e}")

# the limit set is a 2-sphere; its slice by w = 0 is a curve
sl = slice_cloud(pts, "w=0", 0.01)
print(f"{len(sl)} points within 0.01 of w = 0, spanning x3 in [{sl[:, 2].min():.3f}, {sl[:, 2].max():.3f}]")
print("distance from the x1x2-plane (min, median, max):", np.round(np.percentile(np.hypot(pts[:, 2], pts[:, 3]), [0, 50, 100]), 4))

if len(sys.argv) > 1:
    export_cloud(pts, "ply" if sys.argv[1].endswith(".ply") else "csv", sys.argv[1])
    print("wrote", sys.argv[1])
