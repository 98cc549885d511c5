"""CPPoK run on a random clock.

Two clocks are supported:

* ``MtssClock``: Z1(t) = Z(S(t)) with S a mixture of tempered stable
  subordinators;
* ``InverseMtssClock``: Z2(t) = Z(E(t)) with E the first-passage (inverse)
  process of S.

Because Z has stationary independent increments and the clock is
non-decreasing, Z evaluated along the clock on a grid is the cumulative sum of
CPPoK increments whose durations are the clock increments.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .jumps import JumpLaw
from .orderk import (
    Dispersion,
    OrderKParams,
    ProcessPath,
    classify_gap,
    cppok_increments,
    sample_cppok_path,
    unit_moments,
)
from .subordinators import (
    MtssParams,
    default_inverse_step,
    inverse_mean_asymptote,
    laplace_exponent,
    mtss_mean,
    mtss_variance,
    sample_inverse_grid,
    sample_mtss_grid,
)

__all__ = [
    "MtssClock",
    "InverseMtssClock",
    "TimeChangedSpec",
    "InverseMoments",
    "LrdStructure",
    "Asymptote",
    "sample_z1",
    "sample_z1_grid",
    "sample_z2",
    "sample_z2_grid",
    "z1_mean",
    "z1_cov",
    "z1_variance",
    "z1_dispersion_classify",
    "z1_lrd_exponent",
    "z1_pgf",
    "z2_mean",
    "z2_cov",
    "z2_asymptotics",
]

# inner CPPoK paths longer than this are evaluated through increments instead
INNER_HORIZON_CAP = 1e6


@dataclass(frozen=True)
class MtssClock:
    params: MtssParams


@dataclass(frozen=True)
class InverseMtssClock:
    params: MtssParams
    step: float | None = None


@dataclass(frozen=True)
class TimeChangedSpec:
    base: OrderKParams
    law: JumpLaw
    clock: MtssClock | InverseMtssClock

    @property
    def label(self) -> str:
        p = self.clock.params
        same_alpha = p.alpha1 == p.alpha2 or p.c1 == 0 or p.c2 == 0
        if same_alpha and all(m == 0 for _, _, m in p.components):
            return "space-fractional"
        if p.c1 == 1 and p.mu1 > 0 and p.mu2 == 0 and p.alpha1 == p.alpha2:
            return "tempered-space-fractional"
        return "general"

    def _require(self, kind):
        if not isinstance(self.clock, kind):
            raise TypeError(f"operation needs a {kind.__name__}, spec has {type(self.clock).__name__}")


@dataclass
class InverseMoments:
    """Monte Carlo moments of the inverse subordinator on a time grid."""

    grid: np.ndarray
    mean: np.ndarray
    variance: np.ndarray
    cov: np.ndarray
    stderr_mean: np.ndarray
    replicates: int
    bias_bound: float

    def index(self, t: float) -> int:
        hits = np.flatnonzero(np.isclose(self.grid, t, rtol=1e-12, atol=1e-12))
        if hits.size == 0:
            raise KeyError(f"no inverse moments at t={t!r}; grid is {self.grid.tolist()}")
        return int(hits[0])


@dataclass(frozen=True)
class LrdStructure:
    """Correlation decays like t**exponent; Var[Z1(t)] ~ constant * t."""

    exponent: float
    constant: float


@dataclass(frozen=True)
class Asymptote:
    mean: float
    variance: float


# ---------------------------------------------------------------------------
# sampling


def _grid(tgrid):
    tgrid = np.asarray(tgrid, dtype=float)
    if tgrid.ndim != 1 or tgrid.size == 0 or tgrid[0] < 0 or np.any(np.diff(tgrid) <= 0):
        raise ValueError("tgrid must be a non-empty increasing array of non-negative times")
    return tgrid


def _compose(spec: TimeChangedSpec, clock_values: np.ndarray, rng) -> np.ndarray:
    durations = np.diff(clock_values, axis=1, prepend=0.0)
    return np.cumsum(cppok_increments(spec.base, spec.law, durations, rng), axis=1)


def sample_z1_grid(spec: TimeChangedSpec, tgrid, size: int, rng: np.random.Generator) -> np.ndarray:
    spec._require(MtssClock)
    s = sample_mtss_grid(spec.clock.params, _grid(tgrid), size, rng)
    return _compose(spec, s, rng)


def sample_z1(spec: TimeChangedSpec, tgrid, rng: np.random.Generator) -> ProcessPath:
    """One Z1 trajectory observed on ``tgrid``.

    A single inner CPPoK path is run up to the largest clock value and read at
    every S(t).
    """
    spec._require(MtssClock)
    tgrid = _grid(tgrid)
    s = sample_mtss_grid(spec.clock.params, tgrid, 1, rng)[0]
    top = s[-1]
    if top > INNER_HORIZON_CAP:
        values = _compose(spec, s[None, :], rng)[0]
    elif top > 0:
        inner = sample_cppok_path(spec.base, spec.law, top, rng)
        values = inner.value_at(np.minimum(s, top))
    else:
        values = np.zeros_like(s)
    return ProcessPath(tgrid, values, float(tgrid[-1]))


def _inverse_step(spec, tgrid):
    step = spec.clock.step
    return default_inverse_step(spec.clock.params, tgrid[-1]) if step is None else step


def sample_z2_grid(spec: TimeChangedSpec, tgrid, size: int, rng: np.random.Generator) -> np.ndarray:
    spec._require(InverseMtssClock)
    tgrid = _grid(tgrid)
    e = sample_inverse_grid(spec.clock.params, tgrid, _inverse_step(spec, tgrid), size, rng)
    return _compose(spec, e, rng)


def sample_z2(spec: TimeChangedSpec, tgrid, rng: np.random.Generator) -> ProcessPath:
    """One Z2 trajectory observed on ``tgrid``."""
    spec._require(InverseMtssClock)
    tgrid = _grid(tgrid)
    e = sample_inverse_grid(spec.clock.params, tgrid, _inverse_step(spec, tgrid), 1, rng)[0]
    inner = sample_cppok_path(spec.base, spec.law, float(e[-1]), rng)
    return ProcessPath(tgrid, inner.value_at(e), float(tgrid[-1]))


# ---------------------------------------------------------------------------
# Z1 closed forms


def z1_mean(spec: TimeChangedSpec, t: float) -> float:
    spec._require(MtssClock)
    m, _ = unit_moments(spec.base, spec.law)
    return m * mtss_mean(spec.clock.params, t)


def z1_cov(spec: TimeChangedSpec, s: float, t: float) -> float:
    """E[Z(1)]**2 * Var[S(s)] + E[S(s)] * Var[Z(1)] for s <= t."""
    spec._require(MtssClock)
    if s > t:
        raise ValueError("need s <= t")
    m, v = unit_moments(spec.base, spec.law)
    p = spec.clock.params
    return m ** 2 * mtss_variance(p, s) + mtss_mean(p, s) * v


def z1_variance(spec: TimeChangedSpec, t: float) -> float:
    return z1_cov(spec, t, t)


def z1_dispersion_classify(spec: TimeChangedSpec, t: float) -> Dispersion:
    """Sign of E[Z(1)]^2 Var[S(t)] + E[S(t)] (Var[Z(1)] - E[Z(1)])."""
    spec._require(MtssClock)
    if not t > 0:
        raise ValueError("dispersion index is undefined at t = 0")
    m, v = unit_moments(spec.base, spec.law)
    p = spec.clock.params
    es, vs = mtss_mean(p, t), mtss_variance(p, t)
    clock_term = m ** 2 * vs
    base_term = es * (v - m)
    gap = clock_term + base_term
    terms = {"E[S]": es, "Var[S]": vs, "E[Z(1)]": m, "Var[Z(1)]": v,
             "clock_term": clock_term, "base_term": base_term}
    return Dispersion(gap, classify_gap(gap), terms)


def z1_lrd_exponent(spec: TimeChangedSpec) -> LrdStructure:
    spec._require(MtssClock)
    _, v = unit_moments(spec.base, spec.law)
    return LrdStructure(-0.5, mtss_mean(spec.clock.params, 1.0) * v)


def z1_pgf(spec: TimeChangedSpec, u: float, t: float) -> float:
    """E[u^Z1(t)] = exp(-t f(lam (k - G - ... - G^k))), G the jump pgf.

    Valid for every clock, including the pure stable one.
    """
    spec._require(MtssClock)
    if not spec.law.discrete:
        raise TypeError(f"{spec.law!r} is not a law on the non-negative integers")
    g = float(np.polynomial.polynomial.polyval(u, spec.law.pmf()))
    arg = spec.base.lam * (spec.base.k - math.fsum(g ** j for j in range(1, spec.base.k + 1)))
    return math.exp(-t * laplace_exponent(spec.clock.params, max(arg, 0.0)))


# ---------------------------------------------------------------------------
# Z2 closed forms (inverse moments come from simulation)


def z2_mean(spec: TimeChangedSpec, t: float, inverse_moments: InverseMoments) -> float:
    spec._require(InverseMtssClock)
    if inverse_moments is None:
        raise ValueError("inverse moments are required")
    m, _ = unit_moments(spec.base, spec.law)
    return m * float(inverse_moments.mean[inverse_moments.index(t)])


def z2_cov(spec: TimeChangedSpec, s: float, t: float, inverse_moments: InverseMoments) -> float:
    """Var[Z(1)] E[E(s)] + E[Z(1)]**2 Cov[E(s), E(t)] for s <= t."""
    spec._require(InverseMtssClock)
    if inverse_moments is None:
        raise ValueError("inverse moments are required")
    if s > t:
        raise ValueError("need s <= t")
    m, v = unit_moments(spec.base, spec.law)
    i, j = inverse_moments.index(s), inverse_moments.index(t)
    return v * float(inverse_moments.mean[i]) + m ** 2 * float(inverse_moments.cov[i, j])


def z2_asymptotics(spec: TimeChangedSpec, t: float) -> Asymptote:
    """Large-t mean and variance of Z2 from the slope 1/E[S(1)] of E[E(t)].

    The variance keeps only the Var[Z(1)] E[E(t)] part; see README for how
    this compares with simulation.
    """
    spec._require(InverseMtssClock)
    slope = inverse_mean_asymptote(spec.clock.params)
    b = spec.base
    ey, vy = spec.law.mean(), spec.law.variance()
    mean = b.s1 * b.lam * ey * t * slope
    variance = b.s1 * b.lam * (vy + (2 * b.k + 1) / 3 * ey ** 2) * t * slope
    return Asymptote(mean, variance)
