# %% [markdown]
# # Windows of consecutive non-zero coefficients
#
# A window of k consecutive non-zero a(n) exists exactly when a(n) != 0 for
# all n <= k/2.  tau never vanishes in range, so every k has a window; a
# synthetic eigenform with a(2) = 0 shows the other side.

# %%
from hord.construct import build_r_modulus, check_order_conditions
from hord.forms import EXTERNAL, FormDescriptor, build_delta_table, multiplicative_table

tau = build_delta_table(10**5)
for k in (1, 7, 14, 28):
    print(k, check_order_conditions(tau, k).to_json())

fake = multiplicative_table(FormDescriptor(12, 1, EXTERNAL, "a2zero"), {2: 0}, 10**4)
for k in (3, 4, 5):
    res = check_order_conditions(fake, k)
    print(f"a(2)=0, k={k}: cond1={res.cond1} window={res.cond2} at nu={res.witness}")

# %% [markdown]
# The modulus behind the existence argument: D m + r + j factors as
# gcd(D, r + j) times a linear form in m with admissible coefficients.

# %%
rm = build_r_modulus(tau, 7)
print("Sigma", rm.sigma, "exponents", rm.exponents)
print("D =", rm.D, " r =", rm.r)
for form in rm.system.forms:
    print("  ", form)
