# %% [markdown]
# # How much can you say with *when*?
#
# A timing channel carries nothing but timestamps. The encoder waits `W`
# before releasing a symbol, the channel adds a random service delay `S`,
# and the receiver sees the inter-reception time `D = W + S`.
#
# For exponential `S` the capacity is `1 / (e E(S))` nats per unit time,
# reached by a waiting time that is zero with probability `1/e` and
# otherwise exponential with mean `e E(S)`.

# %%
import math

import numpy as np

from timingloop import DiscretizedDist, capacity_exponential, capacity_numeric
from timingloop.capacity import mutual_information
from timingloop.channel import DelayModel, sample_mixture_waits, transmit

for mean_s in (0.5, 1.0, 2.0):
    print(f"E(S) = {mean_s}: C = {capacity_exponential(mean_s):.5f} nats/unit time")

# %% [markdown]
# ## The closed form, checked numerically
#
# Discretize the delay on a lattice, solve the mean-constrained capacity
# for each mean `chi` of the output and keep the best information per unit
# of time.

# %%
res = capacity_numeric(DiscretizedDist.exponential(1.0, 0.05, 25.0), grid_step=0.05)
print(f"numeric {res.capacity_nats_per_sec:.6f} vs 1/e = {1 / math.e:.6f} "
      f"(best chi {res.optimal_chi:.3f}, {res.iterations} iterations)")

# %% [markdown]
# ## The optimal input turns every gap into an exponential
#
# With mixture waits, `D = W + S` should be exponential with mean `e`.

# %%
rng = np.random.default_rng(1)
waits = sample_mixture_waits(1.0, 200_000, rng)
trace = transmit(waits, DelayModel.exponential(1.0), rng)
d = trace.inter_reception
print(f"P(W=0) = {np.mean(waits == 0):.4f} (1/e = {math.exp(-1):.4f})")
print(f"E(D) = {d.mean():.4f}, std(D) = {d.std():.4f} (exponential: both {math.e:.4f})")

# %% [markdown]
# Each symbol then carries about one nat, and the symbols arrive once every
# `e E(S)` on average, which is the `1/(e E(S))` above.

# %%
mix = DiscretizedDist.timing_mixture(1.0, 0.02, 30.0)
print(f"I(W; W+S) = {mutual_information(mix, DiscretizedDist.exponential(1.0, 0.02, 30.0)):.4f} nats")
