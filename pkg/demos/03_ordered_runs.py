# %% [markdown]
# # Ordered runs of |tau|
#
# First by brute force: how often is |tau(m + s1)| < |tau(m + s2)| < |tau(m + s3)|
# for each ordering of the shifts?  Then by construction: pick m in an
# arithmetic progression that pins down tau(m + nu) up to a controllable
# factor, sieve, and check.

# %%
import itertools
import math

from hord.construct import (
    TargetSpec,
    build_progression,
    choose_exponents,
    choose_primes,
    run_ordered_search,
    scan_bruteforce,
    verify_hit,
)
from hord.forms import build_delta_table

tau = build_delta_table(10**6 + 3)
spec3 = TargetSpec((tau,) * 3, (1, 2, 3), mode="abs")
for perm in itertools.permutations((1, 2, 3)):
    res = scan_bruteforce(spec3, 10**6, perm)
    print(perm, "first m =", res.first, " count =", res.count)
print("x / (log x)^3 at 10^6:", round(10**6 / math.log(10**6) ** 3, 1))

# %% [markdown]
# The construction for shifts (1, 2):

# %%
spec = TargetSpec((tau, tau), (1, 2))
primes = choose_primes(spec)
exps = choose_exponents(spec, primes, delta=0.25)
prog = build_progression(spec, primes, exps, delta=0.25)
print("primes", primes, "exponents", exps)
print("m = A n + B with A =", prog.A, "B =", prog.B)
print("linear forms", prog.system.forms, "achieved margin", prog.chain_margins())

res = run_ordered_search(prog, 10**5, eta=0.05)
print(res.counts)
h = res.hits[0]
print("first hit: m =", h["m"], [round(c["lambda"], 5) for c in h["chain"]])
print("independently re-verified:", all(verify_hit(h, spec) for h in res.hits[:25]))
