# A lattice where nothing is stable
#
# Take the points k/100 for k = 0..100 and split them by parity of k.
# Every ball big enough to hold a neighbour holds one of the other colour,
# and every ball too small for that holds only its centre.

# In[1]:

import numpy as np

from domstab import FiniteScenario, ProbeConfig, oracle_dense, oracle_stability_table, test_stable_point
from domstab.catalog import alternating_lattice

c = alternating_lattice()
S = c.ambient.support
fs = FiniteScenario.from_classifier(c)

# Exhaustive answer first: one radius per gap between sorted distances decides everything.

# In[2]:

for mode, rho in (("strict", None), ("resolution", 0.005), ("resolution", 0.01)):
    table = oracle_stability_table(fs, mode, rho)
    print(mode, rho, "stable points:", sum(s for s, _ in table))

# The ball tester walks a shrinking radius schedule and keeps its evidence.

# In[3]:

cfg = ProbeConfig(delta_start=0.1)
v = test_stable_point(c, [0.5], cfg)
print(v.outcome, v.clause, "radius", v.witness_radius)
for r, clause, w, wr in v.evidence[:4]:
    print(f"  r={r:.4g}  {clause}  witness={w}")

# Both colours come within 0.02 of every point, which is what rules out
# stable points at that scale for either colour.

# In[4]:

print("even dense at 0.02:", oracle_dense(fs, 0, 0.02), " odd:", oracle_dense(fs, 1, 0.02))
print("even dense at 0.005:", oracle_dense(fs, 0, 0.005))
