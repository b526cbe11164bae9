# Finding the smallest radius worth testing
#
# Stability questions ask about arbitrarily small balls, but a binary64 point
# only has neighbours down to some spacing. This script measures that spacing.

# In[1]:

import numpy as np

from domstab import estimate_machine_epsilon, representability_floor

# Halve until 1 + eps stops changing. The last value that still changed
# 1.0 is the machine epsilon; the value after it is where we stopped.

# In[2]:

halving = estimate_machine_epsilon(1.0, "halving")
print("halving:", halving.epsilon_prev, "after", halving.iterations, "steps")
print("equals 2**-52:", halving.epsilon_prev == 2.0 ** -52)

# Dividing by 2**n at step n instead drops much faster and skips past the
# unit roundoff, so the recorded previous iterate is orders of magnitude coarser.

# In[3]:

fast = estimate_machine_epsilon(1.0, "compounding")
print("fast recurrence:", fast.epsilon_prev, "stop", fast.epsilon, "steps", fast.iterations)

# The default testing floor scales with the point's magnitude,
# k * eps * (1 + |x|_inf) with k = 4.

# In[4]:

for x in ([0.0], [1.0], [1e3, -2.0], [1e8]):
    print(x, representability_floor(np.array(x)))
