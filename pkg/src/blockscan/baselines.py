"""Comparison methods: the epidemic-alternative likelihood scan and BH.

The likelihood scan assumes one elevated segment of common magnitude
delta0 and maximizes, over all 1 <= i < j <= p,

    sum(X[i+1..j]) - ((j - i) / p) * sum(X) - 0.5 * delta0 * (j - i),

returning the maximizing region (i, j], i.e. the elevated indices are
i+1 .. j. Cost is quadratic in p (each inner maximization is a prefix-sum
scan).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np
from scipy.stats import norm

from .types import Series
from .windows import prefix_sums

ArrayLike = Union[Series, np.ndarray, list, tuple]


@dataclass(frozen=True)
class EpidemicFit:
    """Fitted elevated region (i_hat, j_hat], 1-based, with statistic value."""

    l1: float
    i_hat: int
    j_hat: int

    def __post_init__(self):
        if not 1 <= self.i_hat < self.j_hat:
            raise ValueError("need 1 <= i_hat < j_hat")

    @property
    def breakpoints(self) -> tuple[int, int]:
        """First elevated index and first index past the region."""
        return (self.i_hat + 1, self.j_hat + 1)

    @property
    def cluster(self) -> tuple[int, int]:
        """The elevated indices as a half-open [start, end) interval."""
        return (self.i_hat + 1, self.j_hat + 1)


def _values(x: ArrayLike) -> np.ndarray:
    if isinstance(x, Series):
        return x.values
    return np.asarray(x, dtype=float)


def yao_l1(series: ArrayLike, delta0: float = 1.0) -> EpidemicFit:
    """Exact maximization of the epidemic-alternative statistic.

    Ties break to the lexicographically smallest (i, j).
    """
    if delta0 <= 0:
        raise ValueError("delta0 must be positive")
    x = _values(series)
    p = x.size
    if p < 2:
        raise ValueError("need at least 2 observations")
    s = np.asarray(prefix_sums(x), dtype=float)  # s[j] = sum of X[1..j]
    drift = s[p] / p + 0.5 * delta0
    a = s[1:] - drift * np.arange(1, p + 1)  # a[j-1] corresponds to index j
    best = -np.inf
    best_i = 1
    best_j = 2
    for i in range(1, p):
        cand = a[i:] - a[i - 1]  # candidates j = i+1 .. p
        pos = int(np.argmax(cand))
        val = float(cand[pos])
        if val > best:
            best = val
            best_i = i
            best_j = i + 1 + pos
    return EpidemicFit(l1=best, i_hat=best_i, j_hat=best_j)


def bh_procedure(p_values: np.ndarray, alpha: float) -> np.ndarray:
    """Step-up multiple-testing procedure; returns sorted 1-based rejections.

    Sorts the p-values ascending, finds the largest rank r with
    p_(r) <= r * alpha / m, and rejects the r smallest; returns an empty
    array when no rank qualifies.
    """
    p_values = np.asarray(p_values, dtype=float)
    if np.any((p_values < 0) | (p_values > 1) | ~np.isfinite(p_values)):
        raise ValueError("p-values must lie in [0, 1]")
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must be in (0, 1)")
    m = p_values.size
    order = np.argsort(p_values, kind="stable")
    thresholds = alpha * np.arange(1, m + 1) / m
    passing = np.flatnonzero(p_values[order] <= thresholds)
    if passing.size == 0:
        return np.empty(0, dtype=np.int64)
    r = int(passing[-1]) + 1
    return np.sort(order[:r]) + 1


def one_sided_pvalues(series: ArrayLike, sigma_hat: float) -> np.ndarray:
    """Per-index upper-tail p-values 1 - Phi(X / sigma_hat)."""
    if sigma_hat <= 0:
        raise ValueError("sigma_hat must be positive")
    return norm.sf(_values(series) / sigma_hat)


def two_sided_pvalues(series: ArrayLike, sigma_hat: float) -> np.ndarray:
    """Per-index two-sided p-values 2 * (1 - Phi(|X| / sigma_hat))."""
    if sigma_hat <= 0:
        raise ValueError("sigma_hat must be positive")
    return 2.0 * norm.sf(np.abs(_values(series)) / sigma_hat)
