"""
Running the process on an inverse subordinator
==============================================

Z2(t) = Z(E(t)) where E(t) is the first time S exceeds t. E has no simple
moment formulas, so they are estimated by simulation; for large t,
E[E(t)] ~ t / E[S(1)] and Var[E(t)] ~ t Var[S(1)] / E[S(1)]**3.
"""

# %%
import numpy as np

from cppok import Dirac, InverseMtssClock, MonteCarloConfig, MtssParams, OrderKParams, TimeChangedSpec, run_ensemble
from cppok.stats import inverse_moment_table
from cppok.subordinators import inverse_mean_asymptote, inverse_variance_slope
from cppok.timechange import sample_z2_grid, z2_asymptotics, z2_mean

clock = MtssParams.single(alpha=0.5, mu=1.0)
spec = TimeChangedSpec(OrderKParams(1, 1.0), Dirac(1), InverseMtssClock(clock))
tgrid = [10.0, 50.0]

# %%
table = inverse_moment_table(clock, tgrid, MonteCarloConfig(20_000, 4, tgrid), step=0.02)
for i, t in enumerate(tgrid):
    print(f"t={t:4.0f}  E[E(t)]/t {table.mean[i] / t:.3f} (-> {inverse_mean_asymptote(clock):.3f})"
          f"  Var[E(t)]/t {table.variance[i] / t:.3f} (-> {inverse_variance_slope(clock):.3f})")

# %%
summ = run_ensemble(lambda g, n, rng: sample_z2_grid(spec, g, n, rng), MonteCarloConfig(20_000, 5, tgrid))
asym = z2_asymptotics(spec, 1.0)
print(f"E[Z2(50)] {summ.mean[1]:.2f} vs table-based {z2_mean(spec, 50.0, table):.2f}")
print(f"mean slope {summ.mean[1] / 50:.3f} vs asymptote {asym.mean:.3f}")

# %%
# The closed-form variance slope keeps only Var[Z(1)] E[E(t)]. Adding the
# E[Z(1)]**2 Var[E(t)] part accounts for what the simulation shows.
full = 1.0 * inverse_mean_asymptote(clock) + 1.0 * inverse_variance_slope(clock)
print(f"variance slope {summ.variance[1] / 50:.3f}; asymptote {asym.variance:.3f}; with clock variance {full:.3f}")
