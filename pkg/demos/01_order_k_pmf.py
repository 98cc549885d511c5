"""
Poisson distribution of order k
===============================

Each arrival of a rate k*lam Poisson stream carries a batch of size uniform on
{1, ..., k}. The count N(t) then has a pmf that can be written as a sum over
compositions (slow, exact) or generated by a short linear recursion (fast).
"""

# %%
import numpy as np

from cppok import OrderKParams, pok_pmf, pok_pmf_enum

params = OrderKParams(k=3, lam=0.8)
t = 2.0

# %%
# The recursion grows the table until less than 1e-10 of the mass is missing.
table = pok_pmf(params, t)
print(f"table covers n = 0..{table.nmax}, missing mass {table.tail_mass:.2e}")

# %%
# Brute-force enumeration over every composition agrees to rounding error.
enum = np.array([pok_pmf_enum(params, t, n) for n in range(25)])
print("max |recursion - enumeration| for n < 25:", np.abs(table.probs[:25] - enum).max())

# %%
# Mean and variance of the count are k(k+1)/2 * lam*t and k(k+1)(2k+1)/6 * lam*t.
n = np.arange(table.probs.size)
mean = table.probs @ n
var = table.probs @ n ** 2 - mean ** 2
print(f"mean {mean:.12f} vs {params.s1 * params.lam * t:.12f}")
print(f"var  {var:.12f} vs {params.s2 * params.lam * t:.12f}")

# %%
# Large rates stay finite: the recursion is rescaled on the fly.
big = pok_pmf(OrderKParams(5, 1.0), 2000.0)
print(f"lam*t = 2000: {big.probs.size} terms, mode at n = {big.probs.argmax()}, sum = {big.probs.sum():.15f}")
