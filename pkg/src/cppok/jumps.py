"""Jump-size laws for compound processes.

Every law reports its moments analytically so that moment formulas evaluated
against it are exact. Discrete laws on the non-negative integers additionally
expose their pmf, which the pgf, Lévy-weight and marginal-cdf routines need.
"""

from __future__ import annotations

import math

import numpy as np

__all__ = [
    "JumpLaw",
    "Dirac",
    "DiscretePmf",
    "Exponential",
    "InfiniteMomentError",
]

PMF_SUM_TOL = 1e-12


class InfiniteMomentError(ValueError):
    """Raised when a formula needs a moment that does not exist."""


class JumpLaw:
    """Base class for the distribution of the compounded jumps.

    Subclasses implement :meth:`sample`, :meth:`mean` and
    :meth:`second_moment`. Overriding :meth:`sample_sum` with a closed-form
    route is optional but keeps ensemble sampling vectorized.
    """

    discrete = False

    def sample(self, rng: np.random.Generator, size=None):
        raise NotImplementedError

    def mean(self) -> float:
        raise NotImplementedError

    def second_moment(self) -> float:
        raise NotImplementedError

    def variance(self) -> float:
        return self.second_moment() - self.mean() ** 2

    def sample_sum(self, counts, rng: np.random.Generator) -> np.ndarray:
        """Sum of ``counts[i]`` independent jumps, for each ``i``."""
        counts = np.asarray(counts, dtype=np.int64)
        out = np.zeros(counts.shape, dtype=float)
        flat = out.reshape(-1)
        for i, n in enumerate(counts.reshape(-1)):
            if n > 0:
                flat[i] = float(np.sum(self.sample(rng, size=int(n))))
        return out

    def pmf(self) -> np.ndarray:
        """Probabilities on 0, 1, 2, ... (discrete laws only)."""
        raise TypeError(f"{type(self).__name__} is not a law on the non-negative integers")

    def cdf_of_sum(self, n: int, y):
        """CDF of the ``n``-fold convolution, where available in closed form."""
        raise TypeError(f"no closed-form convolution cdf for {type(self).__name__}")

    def _check_moments(self):
        m, m2 = self.mean(), self.second_moment()
        if not (math.isfinite(m) and math.isfinite(m2)):
            raise InfiniteMomentError(f"{self!r} has no finite second moment")


class Dirac(JumpLaw):
    """Point mass. Integer points make it a discrete law usable by the pgf."""

    def __init__(self, point: float = 1.0):
        self.point = float(point)
        self.discrete = self.point >= 0 and float(self.point).is_integer()

    def __repr__(self):
        return f"Dirac(point={self.point:g})"

    def sample(self, rng, size=None):
        if size is None:
            return self.point
        return np.full(size, self.point)

    def mean(self):
        return self.point

    def second_moment(self):
        return self.point ** 2

    def sample_sum(self, counts, rng):
        return self.point * np.asarray(counts, dtype=float)

    def pmf(self):
        if not self.discrete:
            return super().pmf()
        q = np.zeros(int(self.point) + 1)
        q[-1] = 1.0
        return q

    def cdf_of_sum(self, n, y):
        return np.where(np.asarray(y, dtype=float) >= n * self.point, 1.0, 0.0)


class DiscretePmf(JumpLaw):
    """Law on 0, 1, ..., len(weights)-1 with the given probabilities."""

    discrete = True

    def __init__(self, weights):
        w = np.asarray(weights, dtype=float)
        if w.ndim != 1 or w.size == 0:
            raise ValueError("weights must be a non-empty 1-d sequence")
        if np.any(w < 0):
            raise ValueError("weights must be non-negative")
        if abs(w.sum() - 1.0) > PMF_SUM_TOL:
            raise ValueError(f"weights sum to {w.sum()!r}, not 1")
        self.weights = w
        self._support = np.arange(w.size, dtype=float)

    def __repr__(self):
        return f"DiscretePmf({self.weights.tolist()})"

    def sample(self, rng, size=None):
        return rng.choice(self.weights.size, size=size, p=self.weights).astype(float)

    def mean(self):
        return float(self._support @ self.weights)

    def second_moment(self):
        return float(self._support ** 2 @ self.weights)

    def sample_sum(self, counts, rng):
        counts = np.asarray(counts, dtype=np.int64)
        if self.weights.size == 1:
            return np.zeros(counts.shape)
        alloc = rng.multinomial(counts.reshape(-1), self.weights)
        return (alloc @ self._support).reshape(counts.shape)

    def pmf(self):
        return self.weights.copy()

    def cdf_of_sum(self, n, y):
        q = np.ones(1)
        for _ in range(n):
            q = np.convolve(q, self.weights)
        cdf = np.cumsum(q)
        y = np.floor(np.asarray(y, dtype=float))
        idx = np.clip(y, -1, cdf.size - 1).astype(int)
        return np.where(idx < 0, 0.0, cdf[np.maximum(idx, 0)])


class Exponential(JumpLaw):
    """Exponential jumps with rate ``mu`` (mean ``1/mu``)."""

    def __init__(self, mu: float):
        if not mu > 0:
            raise ValueError("mu must be positive")
        self.mu = float(mu)

    def __repr__(self):
        return f"Exponential(mu={self.mu:g})"

    def sample(self, rng, size=None):
        return rng.exponential(1.0 / self.mu, size=size)

    def mean(self):
        return 1.0 / self.mu

    def second_moment(self):
        return 2.0 / self.mu ** 2

    def sample_sum(self, counts, rng):
        # Gamma(0, .) is the point mass at 0
        return rng.gamma(np.asarray(counts, dtype=float), 1.0 / self.mu)

    def cdf_of_sum(self, n, y):
        from scipy.special import gammainc

        y = np.asarray(y, dtype=float)
        if n == 0:
            return np.where(y >= 0, 1.0, 0.0)
        return np.where(y > 0, gammainc(n, self.mu * np.maximum(y, 0.0)), 0.0)
