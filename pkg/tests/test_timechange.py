import math

import numpy as np
import pytest

from cppok.jumps import Dirac, DiscretePmf, Exponential, InfiniteMomentError
from cppok.orderk import EQUI_TOL, OrderKParams
from cppok.stats import MonteCarloConfig, inverse_moment_table
from cppok.subordinators import MtssParams, mtss_mean, mtss_variance
from cppok.timechange import (
    InverseMoments,
    InverseMtssClock,
    MtssClock,
    TimeChangedSpec,
    sample_z1,
    sample_z1_grid,
    sample_z2,
    sample_z2_grid,
    z1_cov,
    z1_dispersion_classify,
    z1_lrd_exponent,
    z1_mean,
    z1_pgf,
    z1_variance,
    z2_asymptotics,
    z2_cov,
    z2_mean,
)

from conftest import within

CLOCK = MtssParams(0.6, 0.4, 0.5, 0.7, 1.0, 2.0)
BASE = OrderKParams(2, 1.0)
Z1 = TimeChangedSpec(BASE, Exponential(1.0), MtssClock(CLOCK))
Z2 = TimeChangedSpec(BASE, Exponential(1.0), InverseMtssClock(CLOCK, step=0.005))


def test_z1_closed_forms():
    es, vs = mtss_mean(CLOCK, 1.0), mtss_variance(CLOCK, 1.0)
    assert z1_mean(Z1, 1.0) == pytest.approx(3 * es)
    assert z1_cov(Z1, 1.0, 2.0) == pytest.approx(9 * vs + 8 * es)
    assert z1_variance(Z1, 2.0) == pytest.approx(z1_cov(Z1, 2.0, 2.0))
    with pytest.raises(ValueError):
        z1_cov(Z1, 2.0, 1.0)
    lrd = z1_lrd_exponent(Z1)
    assert lrd.exponent == -0.5 and lrd.constant == pytest.approx(8 * es)


def test_z1_ensemble_moments(rng):
    x = sample_z1_grid(Z1, [1.0, 2.0], 100_000, rng)
    for j, t in enumerate((1.0, 2.0)):
        v = z1_variance(Z1, t)
        assert within(x[:, j].mean(), z1_mean(Z1, t), math.sqrt(v / x.shape[0]))
    c = np.cov(x.T)[0, 1]
    assert c == pytest.approx(z1_cov(Z1, 1.0, 2.0), rel=0.05)


def test_z1_single_path(rng):
    path = sample_z1(Z1, [0.5, 1.0, 3.0], rng)
    assert path.values.shape == (3,) and np.all(np.diff(path.values) >= 0)


@pytest.mark.parametrize("mu, kind", [(0.5, "equi"), (0.1, "over"), (1.0, "under")])
def test_z1_dispersion_cases(mu, kind):
    # k=1, Exp(3) jumps: clock term Var[S]/9 balances E[S](2/9 - 1/3) when (1-a)/mu = 1
    spec = TimeChangedSpec(OrderKParams(1, 1.0), Exponential(3.0), MtssClock(MtssParams.single(0.5, mu)))
    d = z1_dispersion_classify(spec, 1.0)
    assert d.kind == kind
    if kind == "equi":
        assert abs(d.gap) < EQUI_TOL
    assert d.gap == pytest.approx(z1_variance(spec, 1.0) - z1_mean(spec, 1.0), abs=1e-12)


def test_z1_dispersion_needs_positive_time():
    with pytest.raises(ValueError):
        z1_dispersion_classify(Z1, 0.0)


def test_z1_pgf_reduces_to_composition(rng):
    spec = TimeChangedSpec(OrderKParams(2, 0.8), DiscretePmf([0.2, 0.5, 0.3]), MtssClock(CLOCK))
    x = sample_z1_grid(spec, [1.5], 100_000, rng)[:, 0]
    v = 0.6 ** x
    assert within(v.mean(), z1_pgf(spec, 0.6, 1.5), v.std() / math.sqrt(v.size))
    assert z1_pgf(spec, 1.0, 1.5) == pytest.approx(1.0)
    stable = TimeChangedSpec(OrderKParams(1, 1.0), Dirac(1), MtssClock(MtssParams.single(0.5, 0.0)))
    # k=1, Dirac(1): exp(-t sqrt(lam (1-u)))
    assert z1_pgf(stable, 0.75, 2.0) == pytest.approx(math.exp(-2.0 * math.sqrt(0.25)))
    with pytest.raises(InfiniteMomentError):
        z1_mean(stable, 1.0)


def test_labels_and_clock_checks():
    stable = TimeChangedSpec(BASE, Dirac(1), MtssClock(MtssParams.single(0.4, 0.0)))
    assert stable.label == "space-fractional"
    assert TimeChangedSpec(BASE, Dirac(1), MtssClock(MtssParams.single(0.4, 1.0))).label == "tempered-space-fractional"
    assert Z1.label == "general"
    with pytest.raises(TypeError):
        z1_mean(Z2, 1.0)
    with pytest.raises(TypeError):
        sample_z2_grid(Z1, [1.0], 10, np.random.default_rng(0))


def test_z2_moments_from_inverse_table(rng):
    tgrid = [1.0, 2.0]
    table = inverse_moment_table(CLOCK, tgrid, MonteCarloConfig(40_000, 11, tgrid), step=0.005)
    x = sample_z2_grid(Z2, tgrid, 40_000, rng)
    assert within(x[:, 1].mean(), z2_mean(Z2, 2.0, table), math.sqrt(x[:, 1].var() / x.shape[0]) * 1.5)
    assert np.cov(x.T)[0, 1] == pytest.approx(z2_cov(Z2, 1.0, 2.0, table), rel=0.06)
    with pytest.raises(KeyError):
        z2_mean(Z2, 3.0, table)
    with pytest.raises(ValueError):
        z2_mean(Z2, 1.0, None)


def test_z2_single_path(rng):
    path = sample_z2(Z2, [0.5, 1.0], rng)
    assert np.all(np.diff(path.values) >= 0)


def test_z2_asymptote_formula():
    spec = TimeChangedSpec(OrderKParams(1, 1.0), Dirac(1), InverseMtssClock(MtssParams.single(0.5, 1.0)))
    a = z2_asymptotics(spec, 50.0)
    assert a.mean == pytest.approx(100.0)
    assert a.variance == pytest.approx(100.0)


def test_inverse_moments_index():
    im = InverseMoments(np.array([1.0, 2.0]), np.zeros(2), np.zeros(2), np.zeros((2, 2)), np.zeros(2), 1, 0.1)
    assert im.index(2.0) == 1
    with pytest.raises(KeyError):
        im.index(1.5)
