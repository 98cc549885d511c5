import math

import numpy as np
import pytest
from scipy import special, stats

from cppok.jumps import InfiniteMomentError
from cppok.subordinators import (
    BudgetExceededError,
    MtssParams,
    default_inverse_step,
    inverse_mean_asymptote,
    inverse_variance_slope,
    laplace_exponent,
    mtss_mean,
    mtss_variance,
    sample_inverse_grid,
    sample_inverse_path,
    sample_mtss_grid,
    sample_mtss_path,
    sample_stable_increment,
    sample_tempered_stable_increment,
)

from conftest import within

CLOCK = MtssParams(0.6, 0.4, 0.5, 0.7, 1.0, 2.0)


def laplace_check(x, target_fn, points):
    for s in points:
        v = np.exp(-s * x)
        assert within(v.mean(), target_fn(s), v.std() / math.sqrt(v.size))


def test_params_validation():
    with pytest.raises(ValueError):
        MtssParams(0.5, 0.6)
    with pytest.raises(ValueError):
        MtssParams(1.0, 0.0, alpha1=1.0)
    with pytest.raises(ValueError):
        MtssParams(1.0, 0.0, mu1=-1.0)
    # an inactive component is not validated
    MtssParams(1.0, 0.0, 0.5, 7.0, 1.0, -3.0)
    assert MtssParams.single(0.3, 2.0).components == [(1.0, 0.3, 2.0)]


def test_pure_stable_has_no_moments():
    p = MtssParams.single(0.5, 0.0)
    assert not p.tempered
    with pytest.raises(InfiniteMomentError):
        mtss_mean(p, 1.0)


def test_moments_are_derivatives_of_laplace_exponent():
    h = 1e-4
    f = lambda s: laplace_exponent(CLOCK, s)
    d1 = (-f(2 * h) + 4 * f(h) - 3 * f(0.0)) / (2 * h)
    d2 = (f(2 * h) - 2 * f(h) + f(0.0)) / h ** 2
    assert mtss_mean(CLOCK, 3.0) == pytest.approx(3.0 * d1, rel=1e-6)
    assert mtss_variance(CLOCK, 3.0) == pytest.approx(-3.0 * d2, rel=1e-3)
    assert mtss_mean(CLOCK, 1.0) == pytest.approx(0.5274306709797458, abs=1e-12)


def test_laplace_exponent_vectorized_and_checked():
    s = np.array([0.0, 1.0, 4.0])
    np.testing.assert_allclose(laplace_exponent(MtssParams.single(0.5, 0.0), s), np.sqrt(s))
    with pytest.raises(ValueError):
        laplace_exponent(CLOCK, -1.0)


@pytest.mark.parametrize("alpha", [0.3, 0.5, 0.8])
def test_stable_laplace_transform(alpha, rng):
    x = sample_stable_increment(alpha, 0.7, rng, 200_000)
    assert np.all(x > 0)
    laplace_check(x, lambda s: math.exp(-0.7 * s ** alpha), (0.5, 1.0, 2.0))


def test_half_stable_median(rng):
    # LT exp(-dt sqrt(s)) is the Levy law with scale dt**2/2, median dt**2 / (4 erfcinv(1/2)**2)
    x = sample_stable_increment(0.5, 1.0, rng, 400_000)
    target = 1.0 / (4 * special.erfcinv(0.5) ** 2)
    assert target == pytest.approx(stats.levy.median(scale=0.5))
    assert np.median(x) == pytest.approx(target, rel=0.01)


@pytest.mark.parametrize("alpha, mu, c, dt", [(0.5, 1.0, 1.0, 0.5), (0.7, 2.0, 0.4, 3.0), (0.3, 5.0, 1.0, 4.0)])
def test_tempered_laplace_transform_and_mean(alpha, mu, c, dt, rng):
    x = sample_tempered_stable_increment(alpha, mu, c, dt, rng, 100_000)
    laplace_check(x, lambda s: math.exp(-dt * c * ((s + mu) ** alpha - mu ** alpha)), (0.5, 2.0))
    m = dt * c * alpha * mu ** (alpha - 1)
    v = dt * c * alpha * (1 - alpha) * mu ** (alpha - 2)
    assert within(x.mean(), m, math.sqrt(v / x.size))


def test_tempered_scalar_and_errors(rng):
    assert isinstance(sample_tempered_stable_increment(0.5, 1.0, 1.0, 1.0, rng), float)
    with pytest.raises(ValueError):
        sample_tempered_stable_increment(0.5, -1.0, 1.0, 1.0, rng)
    with pytest.raises(ValueError):
        sample_stable_increment(1.0, 1.0, rng)


def test_mtss_grid_moments_and_monotonicity(rng):
    grid = [0.5, 1.0, 2.0]
    s = sample_mtss_grid(CLOCK, grid, 50_000, rng)
    assert np.all(np.diff(s, axis=1) >= 0)
    for j, t in enumerate(grid):
        assert within(s[:, j].mean(), mtss_mean(CLOCK, t), math.sqrt(mtss_variance(CLOCK, t) / s.shape[0]))
    path = sample_mtss_path(CLOCK, grid, rng)
    assert path.values.shape == (3,)


def test_inverse_paths_are_monotone_and_consistent(rng):
    tgrid = np.array([0.5, 1.0, 2.0, 4.0])
    step = 0.01
    levels, sub = sample_inverse_grid(CLOCK, tgrid, step, 3, rng, return_subordinator=True)
    assert np.all(np.diff(levels, axis=1) >= 0)
    # the first path: S just below and above the recorded passage level
    for t, e in zip(tgrid, levels[0]):
        i = int(round(e / step))
        assert sub.values[i] > t >= sub.values[i - 1]
    ip = sample_inverse_path(CLOCK, tgrid, None, rng)
    assert ip.bias_bound == default_inverse_step(CLOCK, 4.0)
    assert ip.subordinator is not None


def test_inverse_of_stable_matches_mittag_leffler_moments(rng):
    # for f(s) = s**a: E[E(t)] = t**a / Gamma(1+a), E[E(t)**2] = 2 t**(2a) / Gamma(1+2a)
    a, t = 0.5, 1.0
    p = MtssParams.single(a, 0.0)
    step = default_inverse_step(p, t)
    e = sample_inverse_grid(p, [t], step, 40_000, rng)[:, 0]
    m1 = t ** a / special.gamma(1 + a)
    m2 = 2 * t ** (2 * a) / special.gamma(1 + 2 * a)
    se = e.std() / math.sqrt(e.size)
    assert m1 - 4 * se <= e.mean() <= m1 + step + 4 * se
    se2 = (e ** 2).std() / math.sqrt(e.size)
    assert abs((e ** 2).mean() - m2) <= 4 * se2 + 2 * step * (m1 + step)


def test_inverse_long_run_slopes(rng):
    p = MtssParams.single(0.5, 1.0)
    t = 50.0
    e = sample_inverse_grid(p, [t], 0.05, 20_000, rng)[:, 0]
    assert e.mean() / t == pytest.approx(inverse_mean_asymptote(p), rel=0.03)
    assert e.var() / t == pytest.approx(inverse_variance_slope(p), rel=0.1)


def test_inverse_budget(rng):
    with pytest.raises(BudgetExceededError):
        sample_inverse_grid(CLOCK, [100.0], 0.001, 4, rng, max_steps=100)
    with pytest.raises(ValueError):
        sample_inverse_grid(CLOCK, [1.0, 0.5], 0.01, 4, rng)
