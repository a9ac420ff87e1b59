"""Mergeable running moments (mean and central moments up to order four)."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass
class Moments:
    count: int = 0
    mean: float = 0.0
    m2: float = 0.0
    m3: float = 0.0
    m4: float = 0.0

    @classmethod
    def of(cls, values) -> Moments:
        x = np.asarray(values, dtype=float).ravel()
        if x.size == 0:
            return cls()
        mu = float(x.mean())
        d = x - mu
        d2 = d * d
        return cls(x.size, mu, float(d2.sum()), float((d2 * d).sum()), float((d2 * d2).sum()))

    def push(self, value: float) -> None:
        self.merge(Moments(1, float(value)))

    def merge(self, other: Moments) -> Moments:
        """Fold ``other`` into ``self`` (pairwise update for central moments)."""
        na, nb = self.count, other.count
        if nb == 0:
            return self
        if na == 0:
            self.count, self.mean, self.m2, self.m3, self.m4 = (
                other.count, other.mean, other.m2, other.m3, other.m4)
            return self
        n = na + nb
        delta = other.mean - self.mean
        d_n = delta / n
        d_n2 = d_n * d_n
        cross = delta * d_n * na * nb
        m4 = (
            self.m4 + other.m4
            + cross * d_n2 * (na * na - na * nb + nb * nb)
            + 6.0 * d_n2 * (na * na * other.m2 + nb * nb * self.m2)
            + 4.0 * d_n * (na * other.m3 - nb * self.m3)
        )
        m3 = (
            self.m3 + other.m3
            + cross * d_n * (na - nb)
            + 3.0 * d_n * (na * other.m2 - nb * self.m2)
        )
        self.m2 = self.m2 + other.m2 + cross
        self.m3, self.m4 = m3, m4
        self.mean += d_n * nb
        self.count = n
        return self

    @property
    def variance(self) -> float:
        return self.m2 / (self.count - 1) if self.count > 1 else 0.0

    @property
    def std_error(self) -> float:
        return math.sqrt(self.variance / self.count) if self.count > 1 else 0.0

    @property
    def variance_std_error(self) -> float:
        """Standard error of the unbiased variance, from the fourth moment."""
        n = self.count
        if n < 4:
            return 0.0
        mu4 = self.m4 / n
        s2 = self.variance
        return math.sqrt(max(mu4 - s2 * s2 * (n - 3) / (n - 1), 0.0) / n)
