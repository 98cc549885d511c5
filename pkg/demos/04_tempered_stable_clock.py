"""
Mixtures of tempered stable subordinators
=========================================

The random clock S(t) has Laplace exponent
f(s) = sum_i c_i ((s + mu_i)**alpha_i - mu_i**alpha_i). Stable variates come
from Kanter's representation and are tempered by rejection.
"""

# %%
import numpy as np

from cppok import MtssParams, laplace_exponent, mtss_mean, mtss_variance
from cppok.subordinators import sample_mtss_grid, sample_stable_increment

rng = np.random.default_rng(5)
clock = MtssParams(c1=0.6, c2=0.4, alpha1=0.5, alpha2=0.7, mu1=1.0, mu2=2.0)

# %%
s = sample_mtss_grid(clock, [1.0], 200_000, rng)[:, 0]
print(f"E[S(1)]   {s.mean():.4f} vs {mtss_mean(clock, 1.0):.4f}")
print(f"Var[S(1)] {s.var():.4f} vs {mtss_variance(clock, 1.0):.4f}")
for u in (0.5, 1.0, 2.0):
    print(f"E[exp(-{u} S(1))] {np.exp(-u * s).mean():.5f} vs {np.exp(-laplace_exponent(clock, u)):.5f}")

# %%
# Untempered alpha = 1/2: a Levy law, whose median is known in closed form.
from scipy import special

x = sample_stable_increment(0.5, 1.0, rng, 200_000)
print(f"median {np.median(x):.4f} vs {1 / (4 * special.erfcinv(0.5) ** 2):.4f}")
