"""Poisson and compound Poisson processes of order k.

A Poisson process of order k, PPoK(lam), has arrival epochs from a Poisson
process of rate ``k*lam``. Each epoch brings a batch whose size is uniform on
{1, ..., k}. The compound version CPPoK(lam, H) replaces every unit in the
count by an independent jump drawn from H.

Exact quantities (pmf, pgf, moments, dispersion, Lévy weights, marginal cdf)
live next to the samplers so that each sampler can be checked against them.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .jumps import JumpLaw

__all__ = [
    "OrderKParams",
    "PokPmfTable",
    "ProcessPath",
    "LevyMeasureWeights",
    "Dispersion",
    "EnumerationBudgetError",
    "pok_pmf_enum",
    "pok_pmf",
    "sample_ppok_path",
    "sample_cppok_path",
    "sample_cppok_grid",
    "cppok_increments",
    "cppok_mean",
    "cppok_variance",
    "unit_moments",
    "dispersion_report",
    "cppok_pgf",
    "levy_measure_weights",
    "superposition_sample",
    "martingale_residual",
    "marginal_cdf",
    "TAIL_MASS",
    "EQUI_TOL",
]

#: target residual mass for every truncated infinite sum
TAIL_MASS = 1e-10
#: |gap| below this is reported as equidispersion
EQUI_TOL = 1e-12

ENUM_BUDGET = 2_000_000


class EnumerationBudgetError(ValueError):
    """The brute-force pmf would need more terms than the budget allows."""


@dataclass(frozen=True)
class OrderKParams:
    """Order ``k`` and per-component rate ``lam`` (driving rate is ``k*lam``)."""

    k: int
    lam: float

    def __post_init__(self):
        if int(self.k) != self.k or self.k < 1:
            raise ValueError(f"k must be a positive integer, got {self.k!r}")
        if not self.lam > 0:
            raise ValueError(f"lam must be positive, got {self.lam!r}")
        object.__setattr__(self, "k", int(self.k))
        object.__setattr__(self, "lam", float(self.lam))

    @property
    def rate(self) -> float:
        """Rate of the driving Poisson process."""
        return self.k * self.lam

    @property
    def s1(self) -> float:
        """k(k+1)/2, the mean batch size times k."""
        return self.k * (self.k + 1) / 2

    @property
    def s2(self) -> float:
        """k(k+1)(2k+1)/6, the second batch moment times k."""
        return self.k * (self.k + 1) * (2 * self.k + 1) / 6


@dataclass
class PokPmfTable:
    params: OrderKParams
    t: float
    probs: np.ndarray

    @property
    def nmax(self) -> int:
        return self.probs.size - 1

    @property
    def tail_mass(self) -> float:
        """Probability not covered by the table."""
        return max(0.0, 1.0 - math.fsum(self.probs))


@dataclass
class ProcessPath:
    """Right-continuous step path: ``values[i]`` holds from ``times[i]`` on.

    Before ``times[0]`` the path sits at ``initial``.
    """

    times: np.ndarray
    values: np.ndarray
    horizon: float
    initial: float = 0.0

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if self.times.shape != self.values.shape:
            raise ValueError("times and values must have the same length")
        if self.times.size > 1 and np.any(np.diff(self.times) <= 0):
            raise ValueError("times must be strictly increasing")

    def value_at(self, t):
        t = np.asarray(t, dtype=float)
        if np.any(t > self.horizon * (1 + 1e-12)):
            raise ValueError(f"t beyond horizon {self.horizon}")
        idx = np.searchsorted(self.times, t, side="right") - 1
        vals = np.concatenate(([self.initial], self.values))
        out = vals[idx + 1]
        return out if out.ndim else float(out)

    @property
    def terminal(self) -> float:
        return float(self.values[-1]) if self.values.size else self.initial


@dataclass
class LevyMeasureWeights:
    """``alpha[j-1]`` is the weight of jump size j; ``nu = k*lam*alpha``."""

    alpha: np.ndarray
    nu: np.ndarray
    alpha0: float = 0.0
    tail_mass: float = 0.0


@dataclass(frozen=True)
class Dispersion:
    gap: float
    kind: str  # "over" | "under" | "equi"
    terms: dict = field(default_factory=dict, compare=False)


def classify_gap(gap: float) -> str:
    if abs(gap) < EQUI_TOL:
        return "equi"
    return "over" if gap > 0 else "under"


def _check_t(t):
    if t < 0:
        raise ValueError(f"t must be non-negative, got {t!r}")


# ---------------------------------------------------------------------------
# pmf of the Poisson distribution of order k


def _restricted_compositions(n: int, k: int):
    """Yield (x_1, ..., x_k) >= 0 with sum_j j*x_j == n."""

    def rec(rem, j):
        if j == 1:
            yield (rem,)
            return
        for xj in range(rem // j + 1):
            for rest in rec(rem - j * xj, j - 1):
                yield rest + (xj,)

    yield from rec(n, k)


def _count_compositions(n: int, k: int) -> int:
    ways = [1] + [0] * n
    for part in range(1, k + 1):
        for m in range(part, n + 1):
            ways[m] += ways[m - part]
    return ways[n]


def pok_pmf_enum(params: OrderKParams, t: float, n: int, budget: int = ENUM_BUDGET) -> float:
    """P[N^(k)(t) = n] by summing over every composition of n with parts <= k.

    Slow on purpose: this is the reference the recursion is checked against.
    """
    _check_t(t)
    if int(n) != n or n < 0:
        raise ValueError(f"n must be a non-negative integer, got {n!r}")
    n = int(n)
    size = _count_compositions(n, params.k)
    if size > budget:
        raise EnumerationBudgetError(
            f"{size} compositions of n={n} with parts <= {params.k} exceed budget {budget}"
        )
    lt = params.lam * t
    if lt == 0:
        return 1.0 if n == 0 else 0.0
    log_lt = math.log(lt)
    terms = []
    for xs in _restricted_compositions(n, params.k):
        m = sum(xs)
        log_term = m * log_lt - sum(math.lgamma(x + 1) for x in xs) - params.k * lt
        terms.append(math.exp(log_term))
    return math.fsum(terms)


def _default_nmax(params: OrderKParams, t: float) -> int:
    mean = params.s1 * params.lam * t
    sd = math.sqrt(params.s2 * params.lam * t)
    return int(math.ceil(mean + 12 * sd + 25 * params.k))


def pok_pmf(params: OrderKParams, t: float, nmax: int | None = None) -> PokPmfTable:
    """PoK(lam*t) pmf on 0..nmax through the linear recursion

    p_n = (lam*t/n) * sum_{i=1}^{min(k,n)} i * p_{n-i},  p_0 = exp(-k*lam*t).

    With ``nmax=None`` the table is extended until the residual mass is below
    ``TAIL_MASS``.
    """
    _check_t(t)
    auto = nmax is None
    if not auto and (int(nmax) != nmax or nmax < 0):
        raise ValueError(f"nmax must be a non-negative integer, got {nmax!r}")
    nmax = _default_nmax(params, t) if auto else int(nmax)
    while True:
        probs = _pok_recursion(params.k, params.lam * t, nmax)
        table = PokPmfTable(params, float(t), probs)
        if not auto or table.tail_mass < TAIL_MASS:
            return table
        nmax *= 2


def _pok_recursion(k: int, lt: float, nmax: int) -> np.ndarray:
    p = np.zeros(nmax + 1)
    if lt == 0:
        p[0] = 1.0
        return p
    # run unnormalized, rescaling to stay in range; exp(-k*lt) applied at the end
    p[0] = 1.0
    log_scale = 0.0
    weights = np.arange(1, k + 1, dtype=float)
    for n in range(1, nmax + 1):
        m = min(k, n)
        p[n] = lt / n * float(weights[:m] @ p[n - m : n][::-1])
        if p[n] > 1e250:
            p[: n + 1] *= 1e-250
            log_scale += 250 * math.log(10)
    log_factor = log_scale - k * lt
    if log_factor > -700:
        return p * math.exp(log_factor)
    with np.errstate(divide="ignore", under="ignore"):
        return np.where(p > 0, np.exp(np.log(p) + log_factor), 0.0)


# ---------------------------------------------------------------------------
# sampling


def sample_ppok_path(params: OrderKParams, horizon: float, rng: np.random.Generator) -> ProcessPath:
    """One PPoK trajectory on [0, horizon], stored at its arrival epochs."""
    if not horizon > 0:
        raise ValueError("horizon must be positive")
    n = rng.poisson(params.rate * horizon)
    times = np.sort(rng.uniform(0.0, horizon, size=n))
    batches = rng.integers(1, params.k + 1, size=n)
    return ProcessPath(times, np.cumsum(batches).astype(float), float(horizon))


def sample_cppok_path(
    params: OrderKParams, law: JumpLaw, horizon: float, rng: np.random.Generator
) -> ProcessPath:
    """One CPPoK trajectory: each arrival adds the sum of a batch of jumps."""
    if not horizon > 0:
        raise ValueError("horizon must be positive")
    n = rng.poisson(params.rate * horizon)
    times = np.sort(rng.uniform(0.0, horizon, size=n))
    batches = rng.integers(1, params.k + 1, size=n)
    jumps = law.sample_sum(batches, rng)
    return ProcessPath(times, np.cumsum(jumps), float(horizon))


def _batch_totals(k: int, events: np.ndarray, rng) -> np.ndarray:
    """Sum of ``events`` uniform{1..k} batch sizes, elementwise."""
    if k == 1:
        return events
    alloc = rng.multinomial(events.reshape(-1), np.full(k, 1.0 / k))
    return (alloc @ np.arange(1, k + 1)).reshape(events.shape)


def cppok_increments(params: OrderKParams, law: JumpLaw, durations, rng) -> np.ndarray:
    """Independent CPPoK increments over the given (array of) durations."""
    durations = np.asarray(durations, dtype=float)
    if np.any(durations < 0):
        raise ValueError("durations must be non-negative")
    events = rng.poisson(params.rate * durations)
    counts = _batch_totals(params.k, np.asarray(events, dtype=np.int64), rng)
    return law.sample_sum(counts, rng)


def sample_cppok_grid(
    params: OrderKParams, law: JumpLaw, grid, size: int, rng: np.random.Generator
) -> np.ndarray:
    """``size`` CPPoK paths observed on ``grid``; shape ``(size, len(grid))``.

    Uses the independent stationary increments between consecutive grid
    points, so a long horizon costs no more than a short one.
    """
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or grid.size == 0 or grid[0] < 0 or np.any(np.diff(grid) <= 0):
        raise ValueError("grid must be a non-empty increasing array of non-negative times")
    dt = np.diff(grid, prepend=0.0)
    inc = cppok_increments(params, law, np.broadcast_to(dt, (size, grid.size)), rng)
    return np.cumsum(inc, axis=1)


# ---------------------------------------------------------------------------
# moments and dispersion


def cppok_mean(params: OrderKParams, law: JumpLaw, t: float) -> float:
    _check_t(t)
    law._check_moments()
    return params.s1 * params.lam * t * law.mean()


def cppok_variance(params: OrderKParams, law: JumpLaw, t: float) -> float:
    _check_t(t)
    law._check_moments()
    return params.lam * t * (params.s1 * law.variance() + params.s2 * law.mean() ** 2)


def unit_moments(params: OrderKParams, law: JumpLaw) -> tuple[float, float]:
    """(E[Z(1)], Var[Z(1)])."""
    return cppok_mean(params, law, 1.0), cppok_variance(params, law, 1.0)


def dispersion_report(params: OrderKParams, law: JumpLaw, t: float) -> Dispersion:
    """Sign of Var[Z(t)] - E[Z(t)], evaluated from the closed forms."""
    if not t > 0:
        raise ValueError("dispersion index is undefined at t = 0")
    law._check_moments()
    ey, ey2 = law.mean(), law.second_moment()
    bracket = ey2 - ey + (params.s2 / params.s1 - 1.0) * ey ** 2
    gap = params.s1 * params.lam * t * bracket
    terms = {"mean": cppok_mean(params, law, t), "variance": cppok_variance(params, law, t)}
    return Dispersion(gap, classify_gap(gap), terms)


# ---------------------------------------------------------------------------
# integer-valued jumps: pgf, Lévy weights, superposition


def _require_discrete(law: JumpLaw):
    if not law.discrete:
        raise TypeError(f"{law!r} is not a law on the non-negative integers")


def cppok_pgf(params: OrderKParams, law: JumpLaw, u: float, t: float) -> float:
    """E[u^Z(t)] = exp(lam*t*(G + G^2 + ... + G^k) - k*lam*t), G the jump pgf."""
    _require_discrete(law)
    _check_t(t)
    if not 0 <= u <= 1:
        raise ValueError("u must lie in [0, 1]")
    q = law.pmf()
    g = float(np.polynomial.polynomial.polyval(u, q))
    powers = math.fsum(g ** i for i in range(1, params.k + 1))
    return math.exp(params.lam * t * (powers - params.k))


def levy_measure_weights(params: OrderKParams, law: JumpLaw, jmax: int | None = None) -> LevyMeasureWeights:
    """Jump-size weights alpha_j = (q^(1)_j + ... + q^(k)_j)/k and masses k*lam*alpha_j.

    ``q^(n)`` is the n-fold convolution of the jump pmf. With ``jmax=None``
    the full (finite) support is kept.
    """
    _require_discrete(law)
    q = law.pmf()
    size = params.k * (q.size - 1) + 1
    total = np.zeros(size)
    conv = np.ones(1)
    for _ in range(params.k):
        conv = np.convolve(conv, q)
        total[: conv.size] += conv
    alpha_all = total / params.k
    alpha0 = float(alpha_all[0])
    if jmax is None:
        jmax = max(size - 1, 1)
    if int(jmax) != jmax or jmax < 1:
        raise ValueError("jmax must be a positive integer")
    alpha = np.zeros(int(jmax))
    m = min(int(jmax), size - 1)
    alpha[:m] = alpha_all[1 : m + 1]
    tail = max(0.0, 1.0 - alpha0 - math.fsum(alpha))
    return LevyMeasureWeights(alpha, params.rate * alpha, alpha0, tail)


def superposition_sample(
    params: OrderKParams,
    law: JumpLaw,
    t: float,
    rng: np.random.Generator,
    size=None,
    jmax: int | None = None,
):
    """Draw sum_j j * P_j with P_j independent Poisson(k*lam*alpha_j*t).

    Equal in distribution to the CPPoK value at ``t`` for integer jumps.
    """
    _check_t(t)
    w = levy_measure_weights(params, law, jmax)
    if w.tail_mass > TAIL_MASS:
        warnings.warn(f"jump weights truncated with tail mass {w.tail_mass:.3g}", stacklevel=2)
    shape = () if size is None else (size if isinstance(size, tuple) else (size,))
    draws = rng.poisson(w.nu * t, size=shape + (w.nu.size,))
    out = draws @ np.arange(1, w.nu.size + 1)
    return int(out) if size is None else out


def martingale_residual(path: ProcessPath, params: OrderKParams, law: JumpLaw, t):
    """Z(t) - k(k+1)/2 * lam * t * E[Y] along a path."""
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr < 0) or np.any(t_arr > path.horizon):
        raise ValueError(f"t must lie in [0, {path.horizon}]")
    return path.value_at(t) - params.s1 * params.lam * t_arr * law.mean()


# ---------------------------------------------------------------------------
# marginal distribution


def marginal_cdf(params: OrderKParams, law: JumpLaw, t: float, y) -> float:
    """P[Z(t) <= y] = sum_j p_j(t) H^{*j}(y), truncated by the tail rule.

    Integer-valued laws use exact pmf convolution; exponential jumps use the
    gamma form of their convolutions. Anything else has no closed form here
    and should be handled with an empirical cdf.
    """
    _check_t(t)
    y = float(y)
    if y < 0:
        return 0.0
    if math.isinf(y):
        return 1.0
    probs = pok_pmf(params, t).probs
    if law.discrete:
        q = law.pmf()
        cap = int(math.floor(y)) + 1
        conv = np.zeros(cap)
        conv[0] = 1.0
        acc = probs[0] * conv.sum()
        terms = [acc]
        for j in range(1, probs.size):
            conv = np.convolve(conv, q)[:cap]
            terms.append(probs[j] * math.fsum(conv))
        return min(1.0, math.fsum(terms))
    if type(law).cdf_of_sum is not JumpLaw.cdf_of_sum:
        terms = [probs[j] * float(law.cdf_of_sum(j, y)) for j in range(probs.size)]
        return min(1.0, math.fsum(terms))
    raise TypeError(f"no closed-form marginal cdf for {law!r}; use an empirical cdf")
