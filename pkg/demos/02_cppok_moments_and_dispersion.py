"""
Compound process: moments and dispersion
========================================

Replacing every unit of the order-k count by an independent jump Y gives the
compound process Z(t). We sample it on a grid and compare ensemble moments
with the closed forms, then look at when Z is over- or under-dispersed.
"""

# %%
import numpy as np

from cppok import Exponential, OrderKParams, cppok_mean, cppok_variance, dispersion_report, sample_cppok_grid

rng = np.random.default_rng(7)
params, law = OrderKParams(2, 1.0), Exponential(1.0)
grid = np.array([0.5, 1.0, 2.0])

# %%
x = sample_cppok_grid(params, law, grid, 200_000, rng)
for j, t in enumerate(grid):
    se = x[:, j].std() / np.sqrt(x.shape[0])
    print(f"t={t:3.1f}  mean {x[:, j].mean():.4f} (theory {cppok_mean(params, law, t):.4f}, se {se:.4f})"
          f"  var {x[:, j].var():.4f} (theory {cppok_variance(params, law, t):.4f})")

# %%
# With exponential jumps of rate mu the variance-minus-mean gap changes sign at
# mu = (2k+4)/3. Below it Z is over-dispersed, above it under-dispersed.
for k in (1, 2, 3):
    root = (2 * k + 4) / 3
    kinds = [dispersion_report(OrderKParams(k, 1.0), Exponential(mu), 1.0).kind for mu in (root / 2, root, 2 * root)]
    print(f"k={k}: mu={root / 2:.3f} -> {kinds[0]}, mu={root:.3f} -> {kinds[1]}, mu={2 * root:.3f} -> {kinds[2]}")
