"""Smallest total volume giving a required outlet concentration s_ref.

The baseline is one well-mixed tank, V = Q / mu(s_ref).  With a lateral
tank the same outlet can be reached with less volume once s_ref is above
the maximiser s_hat of mu(s)(s_in - s).

    python3 demos/optimal_design.py
"""

import numpy as np

from lateral_chemostat import DesignSpec, Monod, design_fixed_d, design_free_d, s_hat
from lateral_chemostat.design import default_d_grid, volume_curve

growth = Monod(1.0, 0.5)
print(f"s_hat = {s_hat(growth, 10.0):.5f}\n")

for s_ref in (1.5, 5.9, 8.0):
    spec = DesignSpec(Q=1.0, s_in=10.0, s_ref=s_ref, growth=growth)
    fixed = design_fixed_d(spec, 1.0)
    free = design_free_d(spec)
    print(f"s_ref = {s_ref}  (one tank needs {fixed.baseline_volume:.4f})")
    print(f"  d = 1 : {fixed.kind.value:18s} V1 = {fixed.V1:.4f}  V2 = {fixed.V2:.4f}"
          f"  total = {fixed.total_volume:.4f}")
    if free.d_any:
        print("  free d: nothing beats one mixed tank")
    else:
        print(f"  free d: {free.kind.value:18s} d* = {free.d:.4f}  V2 = {free.V2:.4f}"
              f"  ratio = {free.total_volume / free.baseline_volume:.3f}")
    print()

# The optimal volume as d varies, for s_ref = 8: it dips to the free optimum at d*.
spec = DesignSpec(1.0, 10.0, 8.0, growth)
curve = volume_curve(spec, default_d_grid(spec, n=41))
k = int(np.argmin(curve.volume))
print(f"s_ref = 8: V_opt(d) is smallest on the grid at d = {curve.d[k]:.4f}"
      f" (V = {curve.volume[k]:.4f}, {curve.kinds[k].value})")
for i in range(0, 41, 8):
    print(f"    d = {curve.d[i]:9.4g}   V_opt = {curve.volume[i]:.5f}   {curve.kinds[i].value}")
