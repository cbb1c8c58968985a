"""Exact finite-support and empirical distributions with a shared interface.

Both carriers expose ``cdf``, ``stop_loss`` (``E[(X-k)+]``), the squared
hinge ``E[((X-k)+)**2]``, moments and pointwise maps.  Hinge expectations
are computed from suffix sums of nonnegative terms, so exact comparisons
never subtract two large tail moments.
"""

from __future__ import annotations

import math

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from ._validation import as_probabilities, as_sample

__all__ = [
    "DiscreteDist",
    "EmpiricalDist",
    "cdf",
    "stop_loss",
    "integrated_survival_weighted",
    "kurtosis_beta2",
    "StopLossTransformer",
    "EmpiricalCDFTransformer",
]


class _WeightedSorted:
    """Sorted points with probabilities; base for both carriers."""

    points: np.ndarray
    probs: np.ndarray
    exact: bool

    def _tails(self):
        # P[j] = P(X >= x_j); T[j] = E[(X - x_j)+]; Q[j] = E[((X - x_j)+)**2]
        cached = getattr(self, "_tail_cache", None)
        if cached is not None:
            return cached
        x, p = self.points, self.probs
        P = np.cumsum(p[::-1])[::-1]
        gaps = np.diff(x)
        T = np.zeros_like(x)
        Q = np.zeros_like(x)
        if len(x) > 1:
            T[:-1] = np.cumsum((gaps * P[1:])[::-1])[::-1]
            Q[:-1] = np.cumsum((2.0 * gaps * T[1:] + gaps * gaps * P[1:])[::-1])[::-1]
        self._tail_cache = (P, T, Q)
        return self._tail_cache

    def _hinge(self, k, power):
        k = np.asarray(k, dtype=float)
        P, T, Q = self._tails()
        j = np.searchsorted(self.points, k, side="right")
        inside = j < len(self.points)
        jj = np.minimum(j, len(self.points) - 1)
        d = self.points[jj] - k
        if power == 1:
            val = T[jj] + d * P[jj]
        else:
            val = Q[jj] + 2.0 * d * T[jj] + d * d * P[jj]
        return np.where(inside, val, 0.0)

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        cum = np.concatenate([[0.0], np.cumsum(self.probs)])
        return np.minimum(cum[np.searchsorted(self.points, x, side="right")], 1.0)

    def stop_loss(self, k):
        """``E[(X - k)+]``."""
        return self._hinge(k, 1)

    def stop_loss2(self, k):
        """``E[((X - k)+)**2]``."""
        return self._hinge(k, 2)

    def mean(self) -> float:
        return float(np.dot(self.probs, self.points))

    def moment(self, order: int, central: bool = False) -> float:
        x = self.points - self.mean() if central else self.points
        return float(np.dot(self.probs, x**order))

    def var(self) -> float:
        return self.moment(2, central=True)

    @property
    def min(self) -> float:
        return float(self.points[0])

    @property
    def max(self) -> float:
        return float(self.points[-1])


class DiscreteDist(_WeightedSorted):
    """Finite-support law: strictly increasing points with probabilities summing to 1.

    Duplicate points are merged and zero-probability atoms dropped.
    """

    exact = True

    def __init__(self, points, probs, tol: float = 1e-12):
        points = np.asarray(points, dtype=float).ravel()
        if points.size == 0 or not np.all(np.isfinite(points)):
            raise ValueError("points must be a non-empty finite sequence")
        probs = as_probabilities(probs, points.size, tol)
        order = np.argsort(points, kind="stable")
        uniq, inverse = np.unique(points[order], return_inverse=True)
        merged = np.zeros(uniq.size)
        np.add.at(merged, inverse, probs[order])
        keep = merged > 0
        self.points = uniq[keep]
        self.probs = merged[keep]

    @classmethod
    def from_atoms(cls, atoms) -> "DiscreteDist":
        atoms = list(atoms)
        return cls([a for a, _ in atoms], [p for _, p in atoms])

    @classmethod
    def point_mass(cls, value: float) -> "DiscreteDist":
        return cls([value], [1.0])

    @property
    def atoms(self) -> list[tuple[float, float]]:
        return [(float(a), float(p)) for a, p in zip(self.points, self.probs)]

    @property
    def n(self) -> int:
        return self.points.size

    def map(self, func) -> "DiscreteDist":
        return DiscreteDist(func(self.points), self.probs)

    def abs(self) -> "DiscreteDist":
        return self.map(np.abs)

    def square(self) -> "DiscreteDist":
        return self.map(np.square)

    def scale(self, factor: float) -> "DiscreteDist":
        return self.map(lambda x: factor * x)

    def is_symmetric(self, tol: float = 1e-12) -> bool:
        """True when the law is invariant under ``x -> -x``."""
        mirrored = DiscreteDist(-self.points, self.probs)
        return (mirrored.n == self.n
                and np.allclose(mirrored.points, self.points, rtol=0, atol=tol)
                and np.allclose(mirrored.probs, self.probs, rtol=0, atol=tol))

    def __repr__(self):
        inner = ", ".join(f"({a:.6g}, {p:.6g})" for a, p in self.atoms[:8])
        more = ", ..." if self.n > 8 else ""
        return f"DiscreteDist([{inner}{more}])"

    def __eq__(self, other):
        if not isinstance(other, DiscreteDist):
            return NotImplemented
        return (self.n == other.n and np.array_equal(self.points, other.points)
                and np.array_equal(self.probs, other.probs))

    __hash__ = None


class EmpiricalDist(_WeightedSorted):
    """Monte Carlo sample viewed as the uniform law on its (sorted) values."""

    exact = False

    def __init__(self, sample):
        self.sample = np.sort(as_sample(sample, min_size=2))
        self.points = self.sample
        self.probs = np.full(self.sample.size, 1.0 / self.sample.size)

    @property
    def n(self) -> int:
        return self.sample.size

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        return np.searchsorted(self.sample, x, side="right") / self.n

    def mean(self) -> float:
        return float(self.sample.mean())

    def moment(self, order: int, central: bool = False) -> float:
        x = self.sample - self.sample.mean() if central else self.sample
        return float(np.mean(x**order))

    def std_error_of_mean(self) -> float:
        return math.sqrt(self.sample.var(ddof=1) / self.n)

    def map(self, func) -> "EmpiricalDist":
        return EmpiricalDist(func(self.sample))

    def abs(self) -> "EmpiricalDist":
        return self.map(np.abs)

    def square(self) -> "EmpiricalDist":
        return self.map(np.square)

    def __repr__(self):
        return f"EmpiricalDist(n={self.n}, mean={self.mean():.6g})"


def cdf(dist, x):
    """Right-continuous CDF of ``dist`` at ``x`` (scalar or array).

    Accepts :class:`DiscreteDist`, :class:`EmpiricalDist` or any object with a
    ``cdf`` method, such as a frozen ``scipy.stats`` distribution.
    """
    out = np.asarray(dist.cdf(x), dtype=float)
    return float(out) if out.ndim == 0 else out


def stop_loss(dist, k):
    """Stop-loss transform ``E[(X - k)+]``; exact for discrete laws, sample mean otherwise."""
    out = dist.stop_loss(k)
    return float(out) if np.ndim(out) == 0 else out


def integrated_survival_weighted(dist, x):
    """``int_x^inf (1 - F(u)) u du`` for ``x >= 0``.

    For a symmetric law, four times this value equals the stop-loss of the
    squared variable at ``x**2``.
    """
    x = np.asarray(x, dtype=float)
    if np.any(x < 0):
        raise ValueError("integrated survival is defined for x >= 0")
    # sum_{v > x} p (v**2 - x**2) / 2, split into hinge moments around x
    out = 0.5 * (dist.stop_loss2(x) + 2.0 * x * dist.stop_loss(x))
    return float(out) if out.ndim == 0 else out


def kurtosis_beta2(dist) -> float:
    """Pearson's kurtosis ``mu4 / mu2**2`` (central moments)."""
    m2 = dist.moment(2, central=True)
    m4 = dist.moment(4, central=True)
    if not (math.isfinite(m2) and math.isfinite(m4)) or m2 <= 0:
        raise ValueError(f"kurtosis undefined: second moment {m2!r}, fourth moment {m4!r}")
    return m4 / (m2 * m2)


class StopLossTransformer(TransformerMixin, BaseEstimator):
    """Learn a sample's law in ``fit``; map thresholds to stop-loss values in ``transform``.

    ``power=2`` gives the squared hinge ``E[((X-k)+)**2]`` instead.
    """

    def __init__(self, power=1):
        self.power = power

    def fit(self, X, y=None, sample_weight=None):
        if self.power not in (1, 2):
            raise ValueError(f"power must be 1 or 2, got {self.power!r}")
        x = as_sample(X, min_size=1 if sample_weight is not None else 2, name="X")
        if sample_weight is None:
            self.dist_ = EmpiricalDist(x)
        else:
            self.dist_ = DiscreteDist(x, sample_weight)
        return self

    def transform(self, X):
        check_is_fitted(self, "dist_")
        k = as_sample(X, min_size=1, name="X")
        values = self.dist_.stop_loss(k) if self.power == 1 else self.dist_.stop_loss2(k)
        return values[:, None]


class EmpiricalCDFTransformer(TransformerMixin, BaseEstimator):
    """Learn a sample in ``fit``; ``transform`` returns its empirical CDF at new points."""

    def fit(self, X, y=None):
        self.dist_ = EmpiricalDist(as_sample(X, name="X"))
        return self

    def transform(self, X):
        check_is_fitted(self, "dist_")
        return self.dist_.cdf(as_sample(X, min_size=1, name="X"))[:, None]
