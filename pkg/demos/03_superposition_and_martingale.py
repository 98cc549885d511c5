"""
Integer jumps: superposition and the compensated martingale
===========================================================

For integer-valued jumps Z(t) is a sum of independent scaled Poisson counts,
sum_j j * P_j(t), with intensities read off the convolution powers of the jump
pmf. Subtracting the linear drift turns Z into a martingale.
"""

# %%
import numpy as np

from cppok import DiscretePmf, MonteCarloConfig, OrderKParams, levy_measure_weights, run_ensemble
from cppok import sample_cppok_grid, superposition_sample
from cppok.stats import martingale_increment_test, two_sample_pmf_test

rng = np.random.default_rng(11)
params, law = OrderKParams(2, 1.0), DiscretePmf([0.1, 0.6, 0.3])

# %%
w = levy_measure_weights(params, law)
print("jump sizes 1..%d with weights" % w.alpha.size, np.round(w.alpha, 4), "and zero-jump mass", w.alpha0)

# %%
direct = sample_cppok_grid(params, law, [1.0], 200_000, rng)[:, 0].astype(int)
stacked = superposition_sample(params, law, 1.0, rng, size=200_000)
res = two_sample_pmf_test(direct, stacked)
print(f"two constructions: total variation {res.tv_distance:.4f}, chi-square p = {res.chi2_pvalue:.3f}")

# %%
# Increments of Z(t) - k(k+1)/2 * lam * t * E[Y] have mean zero; halving the drift breaks it.
grid = [0.5, 1.0, 2.0, 4.0]
drift = params.s1 * params.lam * law.mean()
for scale in (1.0, 0.5):
    summ = run_ensemble(lambda g, n, r: sample_cppok_grid(params, law, g, n, r) - scale * drift * np.asarray(g),
                        MonteCarloConfig(200_000, 3, grid))
    verdicts = martingale_increment_test(summ, [(0.5, 1.0), (1.0, 2.0), (2.0, 4.0)])
    print(f"drift x{scale}:", ["0 in CI" if v.contains_zero else f"mean {v.mean:+.3f}" for v in verdicts])
