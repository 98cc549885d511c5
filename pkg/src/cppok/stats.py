"""Monte Carlo ensembles and the estimators that turn them into verdicts.

Replicates are generated in fixed-size blocks. Block ``b`` draws from its own
stream, ``SeedSequence(master_seed, spawn_key=(b,))``, so the result depends
only on the seed and the block size, never on how many workers ran the
blocks or in which order they finished.
"""

from __future__ import annotations

import hashlib
import math
import os
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy import stats as _st

from .subordinators import MtssParams, default_inverse_step, sample_inverse_grid
from .timechange import InverseMoments

__all__ = [
    "MonteCarloConfig",
    "EnsembleSummary",
    "EnsembleError",
    "PowerLawFit",
    "PmfTestResult",
    "IncrementVerdict",
    "block_rng",
    "path_sampler",
    "run_ensemble",
    "fit_power_law",
    "two_sample_pmf_test",
    "martingale_increment_test",
    "inverse_moment_table",
    "default_workers",
]

WORKERS_ENV = "CPPOK_WORKERS"


def default_workers() -> int:
    return max(1, int(os.environ.get(WORKERS_ENV, "1")))


class EnsembleError(RuntimeError):
    pass


@dataclass
class MonteCarloConfig:
    replicates: int
    master_seed: int
    grid: np.ndarray
    workers: int = field(default_factory=default_workers)
    block_size: int = 10_000

    def __post_init__(self):
        self.grid = np.asarray(self.grid, dtype=float)
        if int(self.replicates) != self.replicates or self.replicates < 1:
            raise ValueError("replicates must be a positive integer")
        if self.grid.ndim != 1 or self.grid.size == 0:
            raise ValueError("grid must be a non-empty 1-d array")
        if np.any(np.diff(self.grid) <= 0):
            raise ValueError("grid must be strictly increasing")
        if self.workers < 1 or self.block_size < 1:
            raise ValueError("workers and block_size must be positive")
        if not 0 <= self.master_seed < 2 ** 64:
            raise ValueError("master_seed must be a 64-bit unsigned integer")

    def blocks(self):
        for b, lo in enumerate(range(0, self.replicates, self.block_size)):
            yield b, lo, min(lo + self.block_size, self.replicates)


@dataclass
class EnsembleSummary:
    grid: np.ndarray
    mean: np.ndarray
    variance: np.ndarray
    stderr_mean: np.ndarray
    stderr_variance: np.ndarray
    covariance: np.ndarray
    stderr_covariance: np.ndarray
    replicates: int
    seed: int

    def correlation(self) -> np.ndarray:
        sd = np.sqrt(np.diag(self.covariance))
        with np.errstate(invalid="ignore", divide="ignore"):
            return self.covariance / np.outer(sd, sd)

    def increment(self, i: int, j: int) -> tuple[float, float]:
        """Mean of X(grid[j]) - X(grid[i]) and its standard error."""
        c = self.covariance
        var = max(c[i, i] + c[j, j] - 2 * c[i, j], 0.0)
        return float(self.mean[j] - self.mean[i]), math.sqrt(var / self.replicates)

    def digest(self) -> str:
        h = hashlib.sha256()
        for arr in (self.grid, self.mean, self.variance, self.stderr_mean,
                    self.stderr_variance, self.covariance, self.stderr_covariance):
            h.update(np.ascontiguousarray(arr, dtype="<f8").tobytes())
        h.update(f"{self.replicates}:{self.seed}".encode())
        return h.hexdigest()


def block_rng(master_seed: int, block: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(master_seed, spawn_key=(block,))))


def path_sampler(make_path):
    """Adapt ``make_path(rng) -> ProcessPath`` to the block-sampler protocol."""

    def sampler(grid, n, rng):
        return np.stack([make_path(rng).value_at(grid) for _ in range(n)])

    return sampler


def _simulate(sampler, config: MonteCarloConfig) -> np.ndarray:
    def job(block):
        b, lo, hi = block
        try:
            out = np.asarray(sampler(config.grid, hi - lo, block_rng(config.master_seed, b)), dtype=float)
        except Exception as exc:
            raise EnsembleError(f"replicate block {b} (replicates {lo}..{hi - 1}) failed: {exc}") from exc
        if out.shape != (hi - lo, config.grid.size):
            raise EnsembleError(
                f"replicate block {b} returned shape {out.shape}, expected {(hi - lo, config.grid.size)}"
            )
        return out

    blocks = list(config.blocks())
    if config.workers == 1:
        parts = [job(b) for b in blocks]
    else:
        with ThreadPoolExecutor(max_workers=config.workers) as pool:
            parts = list(pool.map(job, blocks))
    return np.vstack(parts)


def summarize(samples: np.ndarray, grid, seed: int = 0) -> EnsembleSummary:
    """Moments with standard errors from a ``(replicates, len(grid))`` array.

    Means use exactly rounded summation; second and fourth moments are taken
    about those means.
    """
    x = np.asarray(samples, dtype=float)
    n = x.shape[0]
    mean = np.array([math.fsum(col) / n for col in x.T])
    xc = x - mean
    cov = (xc.T @ xc) / max(n - 1, 1)
    cov = (cov + cov.T) / 2
    sq = xc * xc
    m22 = (sq.T @ sq) / n
    m11 = (xc.T @ xc) / n
    var_of_products = np.maximum(m22 - m11 ** 2, 0.0)
    se_cov = np.sqrt(var_of_products / n)
    variance = np.diag(cov).copy()
    return EnsembleSummary(
        grid=np.asarray(grid, dtype=float),
        mean=mean,
        variance=variance,
        stderr_mean=np.sqrt(variance / n),
        stderr_variance=np.diag(se_cov).copy(),
        covariance=cov,
        stderr_covariance=se_cov,
        replicates=n,
        seed=seed,
    )


def run_ensemble(process_sampler, config: MonteCarloConfig, return_samples: bool = False):
    """Run ``process_sampler(grid, n, rng) -> (n, len(grid)) array`` over all blocks."""
    samples = _simulate(process_sampler, config)
    summary = summarize(samples, config.grid, config.master_seed)
    return (summary, samples) if return_samples else summary


# ---------------------------------------------------------------------------
# power-law decay


@dataclass(frozen=True)
class PowerLawFit:
    exponent: float
    intercept: float
    r_squared: float
    fit_range: tuple[float, float]
    points: int

    @property
    def dependence(self) -> str:
        """'LRD' for exponent in (-1, 0), 'SRD' for (-2, -1), else 'neither'."""
        if -1 < self.exponent < 0:
            return "LRD"
        if -2 < self.exponent < -1:
            return "SRD"
        return "neither"


def fit_power_law(times, corr, fit_range=None, min_points: int = 5) -> PowerLawFit:
    """Least-squares slope of log(corr) against log(t)."""
    t = np.asarray(times, dtype=float)
    c = np.asarray(corr, dtype=float)
    if t.shape != c.shape:
        raise ValueError("times and corr must have the same shape")
    lo, hi = (t.min(), t.max()) if fit_range is None else fit_range
    mask = (t >= lo) & (t <= hi)
    t, c = t[mask], c[mask]
    order = np.argsort(t)
    t, c = t[order], c[order]
    bad = np.flatnonzero(~(c > 0))
    if bad.size:
        warnings.warn(
            f"non-positive correlation at t={t[bad[0]]:g}; fit range trimmed to t < {t[bad[0]]:g}",
            stacklevel=2,
        )
        t, c = t[: bad[0]], c[: bad[0]]
    if t.size < min_points:
        raise ValueError(f"power-law fit needs at least {min_points} points, got {t.size}")
    res = _st.linregress(np.log(t), np.log(c))
    return PowerLawFit(float(res.slope), float(res.intercept), float(res.rvalue ** 2),
                       (float(t[0]), float(t[-1])), int(t.size))


# ---------------------------------------------------------------------------
# two-sample comparison of integer laws


@dataclass(frozen=True)
class PmfTestResult:
    tv_distance: float
    chi2_pvalue: float
    chi2: float
    dof: int


def _merge_bins(obs: np.ndarray, min_expected: float = 5.0) -> np.ndarray:
    """Pool adjacent support points until every expected count reaches 5."""
    total = obs.sum()
    row_share = obs.sum(axis=1, keepdims=True) / total
    bins, current = [], np.zeros(2)
    for col in obs.T:
        current = current + col
        if np.all(row_share[:, 0] * current.sum() >= min_expected):
            bins.append(current)
            current = np.zeros(2)
    if current.sum() > 0:
        if bins:
            bins[-1] = bins[-1] + current
        else:
            bins.append(current)
    return np.array(bins).T


def two_sample_pmf_test(samples_a, samples_b) -> PmfTestResult:
    """Total-variation distance and chi-square homogeneity p-value."""
    a = np.asarray(samples_a)
    b = np.asarray(samples_b)
    if a.size == 0 or b.size == 0:
        raise ValueError("both samples must be non-empty")
    if not (np.all(np.equal(np.mod(a, 1), 0)) and np.all(np.equal(np.mod(b, 1), 0))):
        raise ValueError("samples must be integer valued")
    a = a.astype(np.int64)
    b = b.astype(np.int64)
    lo = min(a.min(), b.min())
    hi = max(a.max(), b.max())
    ca = np.bincount(a - lo, minlength=hi - lo + 1).astype(float)
    cb = np.bincount(b - lo, minlength=hi - lo + 1).astype(float)
    tv = 0.5 * float(np.abs(ca / a.size - cb / b.size).sum())
    obs = _merge_bins(np.vstack([ca, cb]))
    if obs.shape[1] < 2:
        return PmfTestResult(tv, 1.0, 0.0, 0)
    expected = obs.sum(axis=1, keepdims=True) * obs.sum(axis=0, keepdims=True) / obs.sum()
    chi2 = float(((obs - expected) ** 2 / expected).sum())
    dof = obs.shape[1] - 1
    return PmfTestResult(tv, float(_st.chi2.sf(chi2, dof)), chi2, dof)


# ---------------------------------------------------------------------------
# martingale increments


@dataclass(frozen=True)
class IncrementVerdict:
    s: float
    t: float
    mean: float
    stderr: float
    lower: float
    upper: float

    @property
    def contains_zero(self) -> bool:
        return self.lower <= 0.0 <= self.upper


def martingale_increment_test(summary: EnsembleSummary, pairs, level: float = 0.99) -> list[IncrementVerdict]:
    """Confidence interval for E[M(t) - M(s)] at every (s, t) pair.

    ``summary`` is the ensemble of compensated paths on a grid containing
    every s and t.
    """
    z = float(_st.norm.ppf(0.5 + level / 2))
    out = []
    for s, t in pairs:
        i = _grid_index(summary.grid, s)
        j = _grid_index(summary.grid, t)
        m, se = summary.increment(i, j)
        out.append(IncrementVerdict(float(s), float(t), m, se, m - z * se, m + z * se))
    return out


def _grid_index(grid, t):
    hits = np.flatnonzero(np.isclose(grid, t, rtol=1e-12, atol=1e-12))
    if hits.size == 0:
        raise KeyError(f"t={t!r} not on grid")
    return int(hits[0])


# ---------------------------------------------------------------------------
# inverse subordinator moments


def inverse_moment_table(
    params: MtssParams, tgrid, config: MonteCarloConfig, step: float | None = None,
    bias_tol: float = 0.01,
) -> InverseMoments:
    """Monte Carlo E[E(t)], Var[E(t)] and Cov[E(s), E(t)] on ``tgrid``."""
    tgrid = np.asarray(tgrid, dtype=float)
    if step is None:
        step = default_inverse_step(params, tgrid[-1])

    def sampler(grid, n, rng):
        return sample_inverse_grid(params, grid, step, n, rng)

    cfg = MonteCarloConfig(config.replicates, config.master_seed, tgrid, config.workers, config.block_size)
    summ = run_ensemble(sampler, cfg)
    if step > bias_tol * summ.mean[-1]:
        warnings.warn(
            f"inverse step {step:g} exceeds {bias_tol:g} of E[E({tgrid[-1]:g})] = {summ.mean[-1]:.4g}",
            stacklevel=2,
        )
    return InverseMoments(tgrid, summ.mean, summ.variance, summ.covariance,
                          summ.stderr_mean, summ.replicates, float(step))
