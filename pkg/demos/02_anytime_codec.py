# %% [markdown]
# # Sending a real number one timestamp at a time
#
# The initial state `X(0)` in `[-L, L]` is turned into an endless bit string
# by repeated bisection. A nested random codebook maps longer and longer
# prefixes to longer and longer sequences of waiting times, so the receiver
# can re-decode everything it has heard after every reception.

# %%
import math

import numpy as np

from timingloop.channel import DelayModel, transmit
from timingloop.codec import DecodeSchedule, build_codebook, count_decode_errors, decode_path, encode
from timingloop.quantizer import quantize, residual

L = 1.0
x0 = 0.3141592653589793
for depth in (1, 4, 8, 16):
    p = quantize(x0, L, depth)
    print(f"depth {depth:2d}: {str(p):16s} residual {residual(x0, p, L):+.2e}")

# %% [markdown]
# ## Anytime decoding
#
# At rate `R` nats per unit time each symbol carries `R E(D) / ln 2` bits,
# with `E(D) = e E(S)`. Below capacity the decoded prefix mostly tracks the
# truth; at this short length a single draw can still slip, and because every
# reception triggers a fresh decode of the whole prefix, a slip is not final.

# %%
mean_s = 1.0
rate = 0.6 / math.e
schedule = DecodeSchedule(rate, math.e * mean_s)
n = 12
book = build_codebook(n, schedule.bits_at(n), mean_s, seed=7, rate_nats=rate)
model = DelayModel.exponential(mean_s)
trace = transmit(encode(x0, L, schedule, book), model, np.random.default_rng(3))
truth = quantize(x0, L, schedule.bits_at(n))
for k in range(1, n + 1):
    path = decode_path(book, trace.inter_reception[:k], model)
    print(f"k={k:2d} bits={path.depth:2d} prefix ok={path.is_prefix_of(truth)} "
          f"|X(0) - X0_hat| = {abs(residual(x0, path, L)):.2e}")

# %% [markdown]
# ## Below versus above capacity
#
# The random-coding error rate at `n'/n = 0.5` bits per symbol (rate about
# `0.13` nats/unit time, below `1/e`) against `1.5` bits per symbol (about
# `0.38`, above it).

# %%
for k in (4, 8):
    lo = count_decode_errors(k, k // 2, mean_s, 400, seed=1)
    hi = count_decode_errors(k, round(1.5 * k), mean_s, 400, seed=1)
    print(f"n={k}: below {lo.error_rate:.3f} +- {lo.std_error:.3f}   "
          f"above {hi.error_rate:.3f} +- {hi.std_error:.3f}")
