"""
Compensated sums and mergeable moment accumulators
"""

from typing import List, Sequence

import numpy as np


class KahanSum:
    """
    Running sum of scalars or equally shaped arrays with a carry term

    The carry holds the low-order bits lost by the last addition and is fed
    back into the next one.
    """

    def __init__(self, shape=()):
        self.sum = np.zeros(shape)
        self.carry = np.zeros(shape)

    def add(self, value) -> None:
        value = value - self.carry
        total = self.sum + value
        self.carry = (total - self.sum) - value
        self.sum = total

    @property
    def value(self) -> np.ndarray:
        return self.sum.copy()


class MomentAccumulator:
    """
    Count, mean, co-moment matrix and per-coordinate third/fourth central sums

    Accumulators of disjoint samples combine with `+`; the result does not
    depend on how the samples were split, up to floating rounding.
    """

    def __init__(self, dim: int):
        self.n = 0
        self.mean = np.zeros(dim)
        self.M2 = np.zeros((dim, dim))
        self.M3 = np.zeros(dim)
        self.M4 = np.zeros(dim)

    @classmethod
    def from_samples(cls, samples: np.ndarray) -> "MomentAccumulator":
        """Two-pass moments of the rows of `samples`"""
        samples = np.atleast_2d(np.asarray(samples, dtype=float))
        acc = cls(samples.shape[1])
        acc.n = samples.shape[0]
        if acc.n == 0:
            return acc
        acc.mean = samples.mean(axis=0)
        centered = samples - acc.mean
        acc.M2 = centered.T @ centered
        acc.M3 = (centered**3).sum(axis=0)
        acc.M4 = (centered**4).sum(axis=0)
        return acc

    def __add__(self, other: "MomentAccumulator") -> "MomentAccumulator":
        if other.n == 0:
            return self._copy()
        if self.n == 0:
            return other._copy()
        na, nb = float(self.n), float(other.n)
        n = na + nb
        delta = other.mean - self.mean
        d2 = delta * delta
        a2, b2 = np.diag(self.M2), np.diag(other.M2)

        new = MomentAccumulator(self.mean.shape[0])
        new.n = self.n + other.n
        new.mean = self.mean + delta * (nb / n)
        new.M2 = self.M2 + other.M2 + np.outer(delta, delta) * (na * nb / n)
        new.M3 = self.M3 + other.M3 + d2 * delta * na * nb * (na - nb) / n**2 + 3.0 * delta * (na * b2 - nb * a2) / n
        new.M4 = (
            self.M4
            + other.M4
            + d2 * d2 * na * nb * (na * na - na * nb + nb * nb) / n**3
            + 6.0 * d2 * (na * na * b2 + nb * nb * a2) / n**2
            + 4.0 * delta * (na * other.M3 - nb * self.M3) / n
        )
        return new

    def _copy(self) -> "MomentAccumulator":
        new = MomentAccumulator(self.mean.shape[0])
        new.n = self.n
        new.mean = self.mean.copy()
        new.M2 = self.M2.copy()
        new.M3 = self.M3.copy()
        new.M4 = self.M4.copy()
        return new

    @property
    def covariance(self) -> np.ndarray:
        if self.n < 2:
            return np.zeros_like(self.M2)
        return self.M2 / (self.n - 1)

    @property
    def skewness(self) -> np.ndarray:
        """Standardized third moment per coordinate; NaN where the variance is zero"""
        var = np.diag(self.M2)
        with np.errstate(divide="ignore", invalid="ignore"):
            out = np.sqrt(self.n) * self.M3 / var**1.5
        return np.where(var > 0.0, out, np.nan)

    @property
    def kurtosis(self) -> np.ndarray:
        """Standardized fourth moment per coordinate (3 for a normal law)"""
        var = np.diag(self.M2)
        with np.errstate(divide="ignore", invalid="ignore"):
            out = self.n * self.M4 / var**2
        return np.where(var > 0.0, out, np.nan)

    def __repr__(self) -> str:
        return f"<MomentAccumulator n={self.n} mean={self.mean}>"


def merge_pairwise(parts: Sequence[MomentAccumulator]) -> MomentAccumulator:
    """
    Combine accumulators along a fixed balanced tree

    The tree only depends on len(parts), so the same leaves always merge
    in the same order.
    """
    if not parts:
        raise ValueError("nothing to merge")
    level: List[MomentAccumulator] = list(parts)
    while len(level) > 1:
        nxt = [level[i] + level[i + 1] for i in range(0, len(level) - 1, 2)]
        if len(level) % 2:
            nxt.append(level[-1])
        level = nxt
    return level[0]
