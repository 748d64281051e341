"""Walk through one chemostat with a lateral tank, from steady states to a run.

Uses the reference setup: Monod growth (mu_max = 1, K = 0.5), Q = 1,
s_in = 10 and two tanks of 0.6 joined by diffusion d = 1.

    python3 demos/simulate_and_equilibria.py
"""

import numpy as np

from lateral_chemostat import (ChemostatConfig, Monod, positive_equilibrium, simulate,
                               washout_is_unique)
from lateral_chemostat.equilibria import washout_equilibrium

growth = Monod(mu_max=1.0, K=0.5)
config = ChemostatConfig(V1=0.6, V2=0.6, Q=1.0, s_in=10.0, d=1.0, growth=growth)

# A single 0.6 tank at Q = 1 would wash out, since mu(s_in) < Q / 0.6.
print(f"mu(s_in) = {growth.mu(10.0):.4f}, Q/V1 = {1 / 0.6:.4f}")
print("washout is the only steady state:", washout_is_unique(config))

# The lateral tank rescues the culture.
washout = washout_equilibrium(config)
eq = positive_equilibrium(config)
print(f"\nwashout      stability = {washout.stability.value}")
print(f"positive     s1 = {eq.s1:.6f}  s2 = {eq.s2:.6f}  stability = {eq.stability.value}")
print("eigenvalues:", np.round(eq.eigenvalues, 5))

# Integrate from a few random starts and watch them meet E*.
rng = np.random.default_rng(7)
horizon = 1e3 * config.V / config.Q
print(f"\nintegrating to t = {horizon:g}")
for start in rng.uniform(0.05, 10.0, size=(4, 4)):
    traj = simulate(config, start, horizon)
    gap = np.max(np.abs(np.array(traj.final) - eq.state))
    print(f"  start {np.round(start, 2)} -> distance to E* {gap:.2e}")
