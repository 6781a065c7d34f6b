# %% [markdown]
# # Sifting the pair n, n + 2
#
# Remove every n for which n or n + 2 has an odd prime factor below z, then
# compare the survivor count with x * W_2(z), and split the survivors by
# what their values look like after full factorization.

# %%
from hord.sieve import (
    LinearSystem,
    mertens_products,
    nonsquarefree_bound,
    prime_value_bound,
    refine_omega1,
    sift_omega,
    validate_system,
)

system = LinearSystem.parse("1,0;1,2|2")
print(validate_system(system).failures)  # only the (2k)! condition at p = 3 is reported

x = 10**6
for z in (10, 50, 200):
    out = sift_omega(system, x, z)
    print(f"z={z:>4}: #Omega = {out.counts['omega']:7d}   x W_2(z) = {out.predicted:10.1f}   ratio {out.ratio:.4f}")

# %%
out = refine_omega1(sift_omega(system, x, 50))
c = out.counts
print(c)
print(f"non-squarefree survivors {c['square']} <= {nonsquarefree_bound(system, x, 50):.0f}")
print(f"prime-valued survivors  {c['prime']} <= {prime_value_bound(system, x, 50):.0f}")
w, w_star = mertens_products(system, 50)
print("W_2(50) =", w, "\nW*_1(50) =", w_star)
