"""Acceptance criteria, runnable from the CLI (``cppok verify``) and pytest.

Each criterion runs at full scale with its tolerance fixed here, times itself
against its runtime budget and returns a :class:`CriterionResult`. ``scale``
shrinks replicate counts for smoke runs only; a run with ``scale != 1`` is not
an acceptance run.
"""

from __future__ import annotations

import math
import os
import tempfile
import time
from dataclasses import dataclass, field

import numpy as np

from .jumps import Dirac, DiscretePmf, Exponential
from .orderk import (
    OrderKParams,
    cppok_mean,
    cppok_variance,
    dispersion_report,
    pok_pmf,
    pok_pmf_enum,
    sample_cppok_grid,
    superposition_sample,
    unit_moments,
)
from .stats import (
    MonteCarloConfig,
    fit_power_law,
    martingale_increment_test,
    run_ensemble,
    two_sample_pmf_test,
)
from .subordinators import (
    MtssParams,
    inverse_mean_asymptote,
    inverse_variance_slope,
    laplace_exponent,
    mtss_mean,
    mtss_variance,
    sample_mtss_grid,
)
from .timechange import (
    InverseMtssClock,
    MtssClock,
    TimeChangedSpec,
    sample_z1_grid,
    sample_z2_grid,
    z1_cov,
    z2_asymptotics,
)

__all__ = ["CriterionResult", "SUITES", "CRITERIA", "run_criterion", "run_suite"]

REFERENCE = OrderKParams(2, 1.0)
REFERENCE_LAW = Exponential(1.0)
REFERENCE_CLOCK = MtssParams(0.6, 0.4, 0.5, 0.7, 1.0, 2.0)
SE_BAND = 4.0


@dataclass
class CriterionResult:
    key: str
    title: str
    passed: bool
    elapsed: float
    budget: float
    metrics: dict = field(default_factory=dict)

    def line(self) -> str:
        flag = "PASS" if self.passed else "FAIL"
        return f"[{flag}] {self.key}: {self.title} ({self.elapsed:.1f}s / {self.budget:.0f}s)"


def _n(full: int, scale: float) -> int:
    return max(1000, int(full * scale))


def _within(value, target, se, band=SE_BAND):
    return bool(abs(value - target) <= band * se)


# ---------------------------------------------------------------------------


def pmf_oracle(scale=1.0):
    worst = 0.0
    for k in range(1, 6):
        for lt in (0.5, 1.0, 2.0, 4.0):
            params = OrderKParams(k, lt)
            table = pok_pmf(params, 1.0, 30).probs
            for n in range(31):
                worst = max(worst, abs(table[n] - pok_pmf_enum(params, 1.0, n)))
    return worst < 1e-12, {"max_abs_diff": worst}


def moment_formulas(scale=1.0, seed=20240101):
    grid = np.array([0.5, 1.0, 2.0])
    cfg = MonteCarloConfig(_n(10 ** 6, scale), seed, grid, block_size=100_000)
    summ = run_ensemble(lambda g, n, rng: sample_cppok_grid(REFERENCE, REFERENCE_LAW, g, n, rng), cfg)
    ok, rows = True, []
    for i, t in enumerate(grid):
        m_th = cppok_mean(REFERENCE, REFERENCE_LAW, t)
        v_th = cppok_variance(REFERENCE, REFERENCE_LAW, t)
        good = _within(summ.mean[i], m_th, summ.stderr_mean[i]) and _within(
            summ.variance[i], v_th, summ.stderr_variance[i])
        ok &= good
        rows.append({"t": t, "mean": summ.mean[i], "theory_mean": m_th, "se_mean": summ.stderr_mean[i],
                     "variance": summ.variance[i], "theory_variance": v_th,
                     "se_variance": summ.stderr_variance[i]})
    return ok, {"rows": rows, "replicates": summ.replicates}


def dispersion_threshold(scale=1.0):
    k1 = OrderKParams(1, 1.0)
    over = dispersion_report(k1, Exponential(1.0), 1.0).kind == "over"
    under = dispersion_report(k1, Exponential(3.0), 1.0).kind == "under"
    flips = {}
    for k in range(1, 6):
        p = OrderKParams(k, 1.0)
        root = (2 * k + 4) / 3
        at = dispersion_report(p, Exponential(root), 1.0)
        below = dispersion_report(p, Exponential(root * (1 - 1e-6)), 1.0)
        above = dispersion_report(p, Exponential(root * (1 + 1e-6)), 1.0)
        flips[k] = at.kind == "equi" and below.kind == "over" and above.kind == "under"
    return over and under and all(flips.values()), {"over_mu1": over, "under_mu3": under, "flip_at_root": flips}


def superposition_identity(scale=1.0, seed=20240102):
    law = Dirac(1)
    n = _n(10 ** 6, scale)
    rng_a = np.random.default_rng([seed, 0])
    rng_b = np.random.default_rng([seed, 1])
    a = sample_cppok_grid(REFERENCE, law, [1.0], n, rng_a)[:, 0]
    b = superposition_sample(REFERENCE, law, 1.0, rng_b, size=n)
    res = two_sample_pmf_test(a, b)
    return res.chi2_pvalue > 0.01, {"p_value": res.chi2_pvalue, "tv": res.tv_distance, "dof": res.dof}


def martingale(scale=1.0, seed=20240103):
    grid = np.array([0.5, 1.0, 2.0, 4.0])
    pairs = [(0.5, 1.0), (1.0, 2.0), (2.0, 4.0)]
    out, ok = {}, True
    for name, law in (("exponential", REFERENCE_LAW), ("discrete", DiscretePmf([0.2, 0.5, 0.3]))):
        drift = REFERENCE.s1 * REFERENCE.lam * law.mean()
        for label, factor in (("compensated", 1.0), ("halved", 0.5)):
            cfg = MonteCarloConfig(_n(10 ** 6, scale), seed, grid, block_size=100_000)

            def sampler(g, m, rng, law=law, factor=factor):
                return sample_cppok_grid(REFERENCE, law, g, m, rng) - factor * drift * g

            verdicts = martingale_increment_test(run_ensemble(sampler, cfg), pairs)
            contains = [v.contains_zero for v in verdicts]
            ok &= all(contains) if factor == 1.0 else not any(contains)
            out[f"{name}/{label}"] = [(v.s, v.t, v.mean, v.stderr, v.contains_zero) for v in verdicts]
    return ok, out


def _lrd_grid(s):
    return np.concatenate([[s], s * np.logspace(1, 3, 9)])


def _lrd_check(summ, s):
    corr = summ.correlation()[0, 1:]
    fit = fit_power_law(summ.grid[1:], corr, (10 * s, 1000 * s))
    ok = -0.6 <= fit.exponent <= -0.4 and fit.r_squared > 0.95
    return ok, {"exponent": fit.exponent, "r_squared": fit.r_squared, "points": fit.points,
                "dependence": fit.dependence, "corr": corr.tolist()}


def lrd_cppok(scale=1.0, seed=20240104):
    s = 1.0
    cfg = MonteCarloConfig(_n(10 ** 5, scale), seed, _lrd_grid(s))
    summ = run_ensemble(lambda g, n, rng: sample_cppok_grid(REFERENCE, REFERENCE_LAW, g, n, rng), cfg)
    return _lrd_check(summ, s)


def lrd_z1(scale=1.0, seed=20240105):
    s = 1.0
    spec = TimeChangedSpec(REFERENCE, REFERENCE_LAW, MtssClock(REFERENCE_CLOCK))
    cfg = MonteCarloConfig(_n(10 ** 5, scale), seed, _lrd_grid(s))
    summ = run_ensemble(lambda g, n, rng: sample_z1_grid(spec, g, n, rng), cfg)
    return _lrd_check(summ, s)


def mtss_moments(scale=1.0, seed=20240106):
    p = REFERENCE_CLOCK
    n = _n(10 ** 6, scale)
    x = sample_mtss_grid(p, [1.0], n, np.random.default_rng(seed))[:, 0]
    m, v = x.mean(), x.var(ddof=1)
    se_m = math.sqrt(v / n)
    se_v = math.sqrt(max(np.mean((x - m) ** 4) - v ** 2, 0.0) / n)
    checks = {"mean": _within(m, mtss_mean(p, 1.0), se_m),
              "variance": _within(v, mtss_variance(p, 1.0), se_v)}
    lt = {}
    for s in (0.5, 1.0, 2.0):
        e = np.exp(-s * x)
        target = math.exp(-laplace_exponent(p, s))
        checks[f"lt_{s}"] = _within(e.mean(), target, e.std(ddof=1) / math.sqrt(n))
        lt[s] = (float(e.mean()), target)
    return all(checks.values()), {"mean": (m, mtss_mean(p, 1.0)), "variance": (v, mtss_variance(p, 1.0)),
                                  "laplace": lt, "checks": checks}


def z1_covariance(scale=1.0, seed=20240107):
    spec = TimeChangedSpec(REFERENCE, REFERENCE_LAW, MtssClock(REFERENCE_CLOCK))
    cfg = MonteCarloConfig(_n(10 ** 6, scale), seed, np.array([1.0, 2.0]), block_size=100_000)
    summ = run_ensemble(lambda g, n, rng: sample_z1_grid(spec, g, n, rng), cfg)
    est, se = summ.covariance[0, 1], summ.stderr_covariance[0, 1]
    theory = z1_cov(spec, 1.0, 2.0)
    return _within(est, theory, se), {"estimate": est, "stderr": se, "theory": theory}


def z2_asymptote(scale=1.0, seed=20240108):
    spec = TimeChangedSpec(OrderKParams(1, 1.0), Dirac(1), InverseMtssClock(MtssParams.single(0.5, 1.0)))
    t = 50.0
    cfg = MonteCarloConfig(_n(10 ** 5, scale), seed, np.array([t]))
    summ = run_ensemble(lambda g, n, rng: sample_z2_grid(spec, g, n, rng), cfg)
    asym = z2_asymptotics(spec, 1.0)
    mean_slope = summ.mean[0] / t
    var_slope = summ.variance[0] / t
    mean_ok = abs(mean_slope / asym.mean - 1) <= 0.05
    var_ok = abs(var_slope / asym.variance - 1) <= 0.10
    # slope including the E[Z(1)]**2 Var[E(t)] term, reported for diagnosis only
    m, v = unit_moments(spec.base, spec.law)
    full = v * inverse_mean_asymptote(spec.clock.params) + m ** 2 * inverse_variance_slope(spec.clock.params)
    return mean_ok and var_ok, {"mean_slope": mean_slope, "theory_mean_slope": asym.mean, "mean_ok": mean_ok,
                                "variance_slope": var_slope, "theory_variance_slope": asym.variance,
                                "variance_ok": var_ok, "slope_with_clock_variance": full}


DETERMINISM_CONFIG = """\
[process]
k = 2
lambda = 1.0

[process.jump]
law = "exponential"
mu = 1.0

[clock]
type = "mtss"
c1 = 0.6
c2 = 0.4
alpha1 = 0.5
alpha2 = 0.7
mu1 = 1.0
mu2 = 2.0

[monte_carlo]
replicates = {replicates}
seed = 987654321
grid = [0.5, 1.0, 2.0]
block_size = 5000
workers = {workers}

[output]
format = "summary"
path = "{path}"
"""


def determinism(scale=1.0):
    from .cli import main

    reps = _n(50_000, scale)
    with tempfile.TemporaryDirectory() as tmp:
        blobs = []
        for run, workers in enumerate((1, 1, 4)):
            cfg = os.path.join(tmp, f"cfg{run}.toml")
            out = os.path.join(tmp, f"out{run}.csv")
            with open(cfg, "w") as fh:
                fh.write(DETERMINISM_CONFIG.format(replicates=reps, workers=workers, path=out))
            code = main(["simulate", cfg])
            if code != 0:
                return False, {"exit_code": code}
            with open(out, "rb") as fh:
                blobs.append(fh.read())
    same_seed = blobs[0] == blobs[1]
    same_workers = blobs[0] == blobs[2]
    return same_seed and same_workers, {"byte_identical": same_seed, "workers_1_vs_4_identical": same_workers}


CRITERIA = {
    "pmf": ("PMF recursion equals enumeration within 1e-12", pmf_oracle, 10),
    "moments": ("CPPoK mean/variance within 4 SE of closed forms", moment_formulas, 120),
    "dispersion": ("Exponential-jump dispersion threshold at (2k+4)/3", dispersion_threshold, 1),
    "superposition": ("CPPoK and superposition pmfs homogeneous (p > 0.01)", superposition_identity, 120),
    "martingale": ("Compensated increments have mean zero; halved compensator rejected", martingale, 120),
    "lrd_cppok": ("CPPoK correlation decay exponent in [-0.6, -0.4]", lrd_cppok, 300),
    "lrd_z1": ("Z1 correlation decay exponent in [-0.6, -0.4]", lrd_z1, 300),
    "mtss": ("MTSS mean, variance and Laplace transform within 4 SE", mtss_moments, 60),
    "z1_cov": ("Cov[Z1(1), Z1(2)] within 4 SE of closed form", z1_covariance, 180),
    "z2_asymptotics": ("Z2 mean slope within 5%, variance slope within 10% of asymptote", z2_asymptote, 300),
    "determinism": ("simulate output byte-identical across runs and worker counts", determinism, 60),
}

SUITES = {key: [key] for key in CRITERIA}
SUITES["lrd"] = ["lrd_cppok", "lrd_z1"]
SUITES["all"] = list(CRITERIA)


def run_criterion(key: str, scale: float = 1.0) -> CriterionResult:
    title, fn, budget = CRITERIA[key]
    start = time.perf_counter()
    ok, metrics = fn(scale=scale)
    elapsed = time.perf_counter() - start
    within_budget = elapsed <= budget
    metrics["within_budget"] = within_budget
    return CriterionResult(key, title, bool(ok and within_budget), elapsed, budget, metrics)


def run_suite(name: str, scale: float = 1.0) -> list[CriterionResult]:
    if name not in SUITES:
        raise KeyError(name)
    return [run_criterion(key, scale) for key in SUITES[name]]
