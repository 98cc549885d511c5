import numpy as np
import pytest
from scipy import stats

from cppok.jumps import Dirac, DiscretePmf, Exponential


def test_dirac_moments_and_pmf():
    d = Dirac(2)
    assert d.discrete
    assert (d.mean(), d.second_moment(), d.variance()) == (2.0, 4.0, 0.0)
    np.testing.assert_array_equal(d.pmf(), [0, 0, 1])


def test_non_integer_dirac_is_continuous():
    d = Dirac(1.5)
    assert not d.discrete
    with pytest.raises(TypeError):
        d.pmf()


def test_discrete_pmf_moments():
    law = DiscretePmf([0.2, 0.5, 0.3])
    assert law.mean() == pytest.approx(1.1)
    assert law.second_moment() == pytest.approx(0.5 + 1.2)
    assert law.variance() == pytest.approx(1.7 - 1.21)


@pytest.mark.parametrize("weights", [[0.5, 0.6], [-0.1, 1.1], [], [[0.5, 0.5]]])
def test_discrete_pmf_rejects_bad_weights(weights):
    with pytest.raises(ValueError):
        DiscretePmf(weights)


def test_exponential_rejects_non_positive_rate():
    with pytest.raises(ValueError):
        Exponential(0.0)


@pytest.mark.parametrize("law", [Dirac(1), DiscretePmf([0.1, 0.6, 0.3]), Exponential(2.0)])
def test_sample_sum_matches_moments(law, rng):
    counts = np.full(200_000, 3)
    s = law.sample_sum(counts, rng)
    assert abs(s.mean() - 3 * law.mean()) < 4 * np.sqrt(3 * law.variance() / s.size) + 1e-12
    assert np.all(law.sample_sum(np.zeros(5, dtype=int), rng) == 0)


def test_exponential_sum_cdf_is_gamma():
    law = Exponential(1.7)
    for n in (1, 3, 8):
        for y in (0.2, 1.0, 5.0):
            assert law.cdf_of_sum(n, y) == pytest.approx(stats.gamma.cdf(y, n, scale=1 / 1.7), abs=1e-14)
