"""
Running the compound process on a tempered stable clock
=======================================================

Z1(t) = Z(S(t)). Its moments combine those of Z(1) and S(t), and its
correlation decays like t**(-1/2), i.e. the process is long-range dependent.
"""

# %%
import numpy as np

from cppok import Exponential, MonteCarloConfig, MtssClock, MtssParams, OrderKParams, TimeChangedSpec
from cppok import fit_power_law, run_ensemble
from cppok.timechange import sample_z1_grid, z1_cov, z1_dispersion_classify, z1_mean, z1_variance

spec = TimeChangedSpec(OrderKParams(2, 1.0), Exponential(1.0), MtssClock(MtssParams(0.6, 0.4, 0.5, 0.7, 1.0, 2.0)))
sampler = lambda g, n, rng: sample_z1_grid(spec, g, n, rng)  # noqa: E731

# %%
summ = run_ensemble(sampler, MonteCarloConfig(200_000, 1, [1.0, 2.0]))
print(f"E[Z1(1)] {summ.mean[0]:.4f} vs {z1_mean(spec, 1.0):.4f}")
print(f"Var[Z1(2)] {summ.variance[1]:.4f} vs {z1_variance(spec, 2.0):.4f}")
print(f"Cov[Z1(1), Z1(2)] {summ.covariance[0, 1]:.4f} +- {summ.stderr_covariance[0, 1]:.4f}"
      f" vs {z1_cov(spec, 1.0, 2.0):.4f}")
print("dispersion at t=1:", z1_dispersion_classify(spec, 1.0).kind)

# %%
times = np.logspace(1, 3, 9)
summ = run_ensemble(sampler, MonteCarloConfig(50_000, 2, np.concatenate([[1.0], times])))
fit = fit_power_law(times, summ.correlation()[0, 1:])
print(f"Corr[Z1(1), Z1(t)] ~ t^{fit.exponent:.3f} (r^2 {fit.r_squared:.3f}): {fit.dependence}")
