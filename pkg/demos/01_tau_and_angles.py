# %% [markdown]
# # Ramanujan's tau and its Satake angles
#
# Build tau(n) for n up to 10^5, check the Hecke relations, then look at how
# the normalized values lambda(p) = tau(p) / p^(11/2) spread over [-2, 2].

# %%
import time

import numpy as np

from hord.forms import DELTA, build_delta_table, prime_power_sequence, theta_angle, verify_table
from hord.satotate import angle_sample, empirical_discrepancy, histogram

t0 = time.perf_counter()
tau = build_delta_table(10**5)
print(f"built tau(1..{tau.n_max}) in {time.perf_counter() - t0:.2f}s")
print("tau(1..10) =", tau.coeffs[:10])

# %%
verify_table(tau)
print("a(1) = 1, Deligne, prime-power recurrence and multiplicativity all hold")

# %% [markdown]
# At a fixed prime the sequence tau(p^l) is a linear recurrence.  Writing
# lambda(p) = 2 cos(theta), the normalized values are sin((l+1) theta) / sin(theta).

# %%
p = 5
seq = prime_power_sequence(DELTA, p, tau[p], 8)
theta = theta_angle(DELTA, p, tau[p])
for l, v in enumerate(seq):
    print(f"l={l}: tau(5^{l}) = {v:>40d}   normalized {v / 5 ** (5.5 * l):+.6f}"
          f"   via angle {np.sin((l + 1) * theta) / np.sin(theta):+.6f}")

# %%
sample = angle_sample(tau)
print(f"{len(sample)} primes, KS distance to Sato-Tate: {empirical_discrepancy(sample):.4f}")
for row in histogram(sample, bins=10):
    bar = "#" * int(row["count"] / 20)
    print(f"[{row['lo']:+.1f}, {row['hi']:+.1f})  {row['count']:5d}  exp {row['expected']:7.1f}  {bar}")
