"""How the outlet concentration s1* depends on the diffusion rate d.

Three volume pairs, one per existence case, swept over d.  For each the
script prints the case, the shape of d -> s1*(d), the minimiser d* and a
coarse table of the curve.

    python3 demos/diffusion_map.py
"""

import math

import numpy as np

from lateral_chemostat import ChemostatConfig, Monod, sweep
from lateral_chemostat.dmap import default_grid

growth = Monod(1.0, 0.5)

for V1, V2 in [(0.4, 0.4), (0.6, 0.6), (1.5, 2.0)]:
    config = ChemostatConfig(V1, V2, 1.0, 10.0, 1.0, growth)
    profile = sweep(config, default_grid(config, n=120))
    print(f"V1 = {V1}, V2 = {V2}: case {profile.case.value}, shape {profile.shape}")
    if math.isfinite(profile.d_bar):
        print(f"  positive state exists only for d < d_bar = {profile.d_bar:.5f}")
    if math.isfinite(profile.d_star):
        print(f"  s1* is smallest at d* = {profile.d_star:.5f}")
    else:
        print("  s1* keeps decreasing as d grows")
    d, s1, s2, _ = profile.arrays()
    for k in np.linspace(0, len(d) - 1, 7).astype(int):
        print(f"    d = {d[k]:10.4g}   s1* = {s1[k]:8.5f}   s2* = {s2[k]:8.5f}")
    print()
