"""Stable, tempered stable and mixed tempered stable subordinators.

The mixture (MTSS) has Laplace exponent

    f(s) = c1*((s + mu1)**a1 - mu1**a1) + c2*((s + mu2)**a2 - mu2**a2)

and is simulated as the sum of two independent tempered stable components.
Each tempered increment is an exactly sampled positive stable variate kept
with probability exp(-mu*X). Inverse subordinators are built by running the
subordinator on a regular operational grid and inverting.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .jumps import InfiniteMomentError

__all__ = [
    "MtssParams",
    "SubordinatorPath",
    "InversePath",
    "laplace_exponent",
    "mtss_mean",
    "mtss_variance",
    "sample_stable_increment",
    "sample_tempered_stable_increment",
    "sample_mtss_increments",
    "sample_mtss_grid",
    "sample_mtss_path",
    "sample_inverse_grid",
    "sample_inverse_path",
    "default_inverse_step",
    "inverse_mean_asymptote",
    "inverse_variance_slope",
    "BudgetExceededError",
]

WEIGHT_TOL = 1e-12


class BudgetExceededError(RuntimeError):
    """The subordinator did not pass the target level within the step budget."""


@dataclass(frozen=True)
class MtssParams:
    c1: float = 1.0
    c2: float = 0.0
    alpha1: float = 0.5
    alpha2: float = 0.5
    mu1: float = 1.0
    mu2: float = 0.0

    def __post_init__(self):
        if self.c1 < 0 or self.c2 < 0:
            raise ValueError("mixing weights must be non-negative")
        if abs(self.c1 + self.c2 - 1.0) > WEIGHT_TOL:
            raise ValueError(f"c1 + c2 must equal 1, got {self.c1 + self.c2!r}")
        for c, a, m, i in self._raw():
            if c > 0:
                if not 0 < a < 1:
                    raise ValueError(f"alpha{i} must lie in (0, 1), got {a!r}")
                if m < 0:
                    raise ValueError(f"mu{i} must be non-negative, got {m!r}")

    def _raw(self):
        return ((self.c1, self.alpha1, self.mu1, 1), (self.c2, self.alpha2, self.mu2, 2))

    @property
    def components(self) -> list[tuple[float, float, float]]:
        """Active (c, alpha, mu) triples."""
        return [(c, a, m) for c, a, m, _ in self._raw() if c > 0]

    @property
    def tempered(self) -> bool:
        """True when every active component has finite moments."""
        return all(m > 0 for _, _, m in self.components)

    def require_tempered(self):
        if not self.tempered:
            raise InfiniteMomentError(
                "a component with mu = 0 (pure stable) has infinite mean and variance"
            )

    @classmethod
    def single(cls, alpha: float, mu: float) -> "MtssParams":
        return cls(1.0, 0.0, alpha, alpha, mu, 0.0)


@dataclass
class SubordinatorPath:
    grid: np.ndarray
    values: np.ndarray
    params: MtssParams


@dataclass
class InversePath:
    """First-passage levels on a physical time grid.

    ``values`` over-estimate the exact first passage by at most
    ``bias_bound``. ``subordinator`` is the operational-time path the levels
    were read from.
    """

    grid: np.ndarray
    values: np.ndarray
    bias_bound: float
    subordinator: SubordinatorPath | None = None


def laplace_exponent(params: MtssParams, s):
    s_arr = np.asarray(s, dtype=float)
    if np.any(s_arr < 0):
        raise ValueError("s must be non-negative")
    out = sum(c * ((s_arr + m) ** a - m ** a) for c, a, m in params.components)
    return float(out) if np.ndim(out) == 0 else out


def mtss_mean(params: MtssParams, t: float) -> float:
    params.require_tempered()
    return t * sum(c * a * m ** (a - 1) for c, a, m in params.components)


def mtss_variance(params: MtssParams, t: float) -> float:
    params.require_tempered()
    return t * sum(c * a * (1 - a) * m ** (a - 2) for c, a, m in params.components)


def inverse_mean_asymptote(params: MtssParams) -> float:
    """Large-t slope of E[E(t)], i.e. 1/E[S(1)]."""
    return 1.0 / mtss_mean(params, 1.0)


def inverse_variance_slope(params: MtssParams) -> float:
    """Large-t slope of Var[E(t)], Var[S(1)]/E[S(1)]**3 (renewal CLT)."""
    return mtss_variance(params, 1.0) / mtss_mean(params, 1.0) ** 3


# ---------------------------------------------------------------------------
# variate generation


def sample_stable_increment(alpha: float, dt: float, rng: np.random.Generator, size=None):
    """Positive stable variate with E[exp(-s X)] = exp(-dt * s**alpha).

    Kanter's representation: for U uniform on (0, pi) and W standard
    exponential, sin(aU)/sin(U)**(1/a) * (sin((1-a)U)/W)**((1-a)/a) has
    Laplace transform exp(-s**a).
    """
    if not 0 < alpha < 1:
        raise ValueError("alpha must lie in (0, 1)")
    if not dt > 0:
        raise ValueError("dt must be positive")
    u = np.pi * (1.0 - rng.random(size))
    w = rng.standard_exponential(size)
    x = (
        np.sin(alpha * u)
        / np.sin(u) ** (1.0 / alpha)
        * (np.sin((1.0 - alpha) * u) / w) ** ((1.0 - alpha) / alpha)
    )
    return dt ** (1.0 / alpha) * x


def _tempered_batch(alpha, mu, scale_exp, count, rng):
    """``count`` accepted variates with LT exp(-scale_exp*((s+mu)**a - mu**a))."""
    out = np.empty(count)
    filled = 0
    accept = math.exp(-scale_exp * mu ** alpha)
    while filled < count:
        need = count - filled
        n = int(need / accept * 1.1) + 16
        x = sample_stable_increment(alpha, scale_exp, rng, n)
        keep = x[rng.random(n) < np.exp(-mu * x)]
        take = min(keep.size, need)
        out[filled : filled + take] = keep[:take]
        filled += take
    return out


def sample_tempered_stable_increment(
    alpha: float, mu: float, weight_c: float, dt: float, rng: np.random.Generator, size=None
):
    """Variate with E[exp(-s X)] = exp(-dt*c*((s+mu)**alpha - mu**alpha)).

    The interval is split into ``m`` pieces with dt*c*mu**alpha/m <= 1 so each
    rejection step accepts with probability at least exp(-1).
    """
    if not dt > 0 or not weight_c > 0:
        raise ValueError("dt and weight_c must be positive")
    if mu < 0:
        raise ValueError("mu must be non-negative")
    tau = weight_c * dt
    if mu == 0:
        return sample_stable_increment(alpha, tau, rng, size)
    pieces = max(1, math.ceil(tau * mu ** alpha))
    n = 1 if size is None else int(np.prod(size))
    x = _tempered_batch(alpha, mu, tau / pieces, n * pieces, rng)
    x = x.reshape(n, pieces).sum(axis=1)
    return float(x[0]) if size is None else x.reshape(size)


def sample_mtss_increments(params: MtssParams, dt: float, size, rng: np.random.Generator):
    """Independent MTSS increments over a common duration ``dt``."""
    total = np.zeros(size)
    for c, a, m in params.components:
        total += sample_tempered_stable_increment(a, m, c, dt, rng, size)
    return total


def _check_grid(grid):
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or grid.size == 0 or grid[0] < 0 or np.any(np.diff(grid) <= 0):
        raise ValueError("grid must be a non-empty increasing array of non-negative times")
    return grid


def sample_mtss_grid(params: MtssParams, grid, size: int, rng: np.random.Generator) -> np.ndarray:
    """``size`` subordinator paths on ``grid``; shape ``(size, len(grid))``."""
    grid = _check_grid(grid)
    out = np.zeros((size, grid.size))
    prev = np.zeros(size)
    for i, dt in enumerate(np.diff(grid, prepend=0.0)):
        if dt > 0:
            prev = prev + sample_mtss_increments(params, dt, size, rng)
        out[:, i] = prev
    return out


def sample_mtss_path(params: MtssParams, grid, rng: np.random.Generator) -> SubordinatorPath:
    grid = _check_grid(grid)
    return SubordinatorPath(grid, sample_mtss_grid(params, grid, 1, rng)[0], params)


def default_inverse_step(params: MtssParams, tmax: float) -> float:
    """1% of the rough first-passage level 1/f(1/tmax) at ``tmax``."""
    return 0.01 / laplace_exponent(params, 1.0 / tmax)


def sample_inverse_grid(
    params: MtssParams,
    tgrid,
    step: float,
    size: int,
    rng: np.random.Generator,
    max_steps: int = 1_000_000,
    return_subordinator: bool = False,
):
    """First-passage levels E(t) = inf{r : S(r) > t} for ``size`` paths.

    S is simulated on {step, 2*step, ...} until it passes max(tgrid); E(t) is
    taken as the first grid level where S exceeds t, which over-estimates the
    exact passage level by less than ``step``.
    """
    tgrid = _check_grid(tgrid)
    if not step > 0:
        raise ValueError("step must be positive")
    tmax = tgrid[-1]
    if params.tempered:
        guess = tmax * inverse_mean_asymptote(params) / step
    else:
        guess = 1.0 / (laplace_exponent(params, 1.0 / tmax) * step)
    chunk = int(min(max(16, 1.25 * guess + 8), max_steps))

    levels = np.full((size, tgrid.size), np.nan)
    s_last = np.zeros(size)
    active = np.arange(size)
    done = 0
    pieces = []
    while active.size:
        if done >= max_steps:
            raise BudgetExceededError(
                f"{active.size} paths still below t={tmax} after {done} operational steps"
            )
        n = min(chunk, max_steps - done)
        s = s_last[active, None] + np.cumsum(
            sample_mtss_increments(params, step, (active.size, n), rng), axis=1
        )
        if return_subordinator:
            pieces.append(s[0] if active[0] == 0 else np.empty(0))
        top = s[:, -1]
        for g, t in enumerate(tgrid):
            rows = np.isnan(levels[active, g]) & (top > t)
            if rows.any():
                first = np.argmax(s[rows] > t, axis=1)
                levels[active[rows], g] = (done + first + 1) * step
        s_last[active] = top
        active = active[top <= tmax]
        done += n
    if return_subordinator:
        values = np.concatenate([[0.0]] + pieces)
        grid = step * np.arange(values.size)
        return levels, SubordinatorPath(grid, values, params)
    return levels


def sample_inverse_path(
    params: MtssParams,
    tgrid,
    step: float | None,
    rng: np.random.Generator,
    max_steps: int = 1_000_000,
) -> InversePath:
    tgrid = _check_grid(tgrid)
    if step is None:
        step = default_inverse_step(params, tgrid[-1])
    levels, sub = sample_inverse_grid(
        params, tgrid, step, 1, rng, max_steps=max_steps, return_subordinator=True
    )
    return InversePath(tgrid, levels[0], float(step), sub)
