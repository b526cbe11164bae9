# Interior points, boundary points, and three ways to tell them apart
#
# Open unit box against its complement, then the open unit disk.

# In[1]:

import numpy as np

from domstab import (ProbeConfig, cross_check_accumulation, reverify_witness, test_stability_via_series,
                     test_stable_point)
from domstab.catalog import interior_probes, open_box, open_disk, unit_circle_probes

box = open_box()
cfg = ProbeConfig(delta_start=0.25)

# An interior point gets a certificate no larger than its distance to the edge.

# In[2]:

for x in ([0.5, 0.5], [0.9, 0.2], [0.999, 0.5]):
    v = test_stable_point(box, x, cfg)
    print(x, v.outcome, v.certified_delta)

# Ball probing and accumulation testing should tell the same story on an open set.

# In[3]:

P = interior_probes(200, margin=0.05)
rep = cross_check_accumulation(box, P, cfg, eligible=True)
print("agreement:", rep.agreed, "/", rep.total)

# Sequences that converge to the point from several directions give a third
# opinion. On the unit circle the inward sequence lands in the disk.

# In[4]:

disk = open_disk()
x = [1.0, 0.0]
s = test_stability_via_series(disk, x, cfg=ProbeConfig(delta_start=0.1))
print("series:", s.outcome, s.clause, "witness", s.witness, s.notes)

# In[5]:

C = unit_circle_probes(50)
verdicts = [test_stable_point(disk, p, ProbeConfig(), probe_index=k) for k, p in enumerate(C)]
print("circle:", {v.outcome for v in verdicts}, "all witnesses check out:",
      all(reverify_witness(disk, p, v) for p, v in zip(C, verdicts)))
