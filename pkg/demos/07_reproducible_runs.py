"""
Reproducible ensembles and the command line
===========================================

Replicates are simulated in fixed-size blocks, each with its own seed stream
derived from the master seed, so results are identical for any worker count.
The same experiments run from TOML configs via the ``cppok`` command.
"""

# %%
import pathlib
import subprocess
import sys

from cppok import Exponential, MonteCarloConfig, OrderKParams, run_ensemble, sample_cppok_grid

params, law = OrderKParams(2, 1.0), Exponential(1.0)
sampler = lambda g, n, rng: sample_cppok_grid(params, law, g, n, rng)  # noqa: E731

one = run_ensemble(sampler, MonteCarloConfig(100_000, 42, [1.0, 2.0], workers=1))
four = run_ensemble(sampler, MonteCarloConfig(100_000, 42, [1.0, 2.0], workers=4))
print("1 worker :", one.digest()[:16])
print("4 workers:", four.digest()[:16])

# %%
here = pathlib.Path(__file__).parent
for args in (["pmf", "--k", "2", "--lambda", "1", "--t", "1", "--nmax", "6", "--oracle"],
             ["simulate", str(here / "configs" / "cppok.toml")],
             ["dispersion", "--k", "2", "--lambda", "1", "--jump", "exponential:1", "--t", "1"]):
    print("$ cppok", " ".join(args))
    out = subprocess.run([sys.executable, "-m", "cppok", *args], capture_output=True, text=True)
    print(out.stdout, end="")
