"""Sliding-window statistics computed in O(p) via prefix sums.

All statistics share one index convention: a window of size k anchored at
offset j covers sequence positions j+1 .. j+k (1-based), and the statistic
is defined for j = 0 .. p-k. The left counterpart of a statistic R is
L[j] = R[j-k], defined for j = k .. p-k.

Prefix sums accumulate in extended precision so that window sums stay
accurate for sequences up to ~1e7 points.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Union

import numpy as np

from .types import Series

_LEFT_KIND = {
    "R_circ": "L_circ",
    "R_dagger": "L_dagger",
    "R_star": "L_star",
    "R_hat": "L_hat",
    "R_flat": "L_flat",
    "R_j4": "L_j4",
    "R_star_j4": "L_star_j4",
    "R_ddagger": "L_ddagger",
}

ArrayLike = Union[Series, np.ndarray, list, tuple]


@dataclass(frozen=True)
class StatSeries:
    """A windowed statistic over offsets j = start .. start + len(values) - 1."""

    values: np.ndarray
    kind: str
    k: int
    start: int = 0

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def stop(self) -> int:
        """One past the last valid offset."""
        return self.start + self.values.size

    def at(self, j) -> np.ndarray:
        """Value(s) at offset(s) j."""
        return self.values[np.asarray(j) - self.start]


def _values(x: ArrayLike) -> np.ndarray:
    if isinstance(x, Series):
        return x.values
    return np.asarray(x, dtype=float)


def prefix_sums(x: np.ndarray) -> np.ndarray:
    """Length p+1 prefix-sum array, accumulated in extended precision."""
    x = np.asarray(x)
    out = np.empty(x.size + 1, dtype=np.longdouble)
    out[0] = 0.0
    np.cumsum(x, dtype=np.longdouble, out=out[1:])
    return out


def moving_sum(x: ArrayLike, k: int) -> np.ndarray:
    """Sums of x over windows j+1..j+k for j = 0..p-k, as float64."""
    x = _values(x)
    p = x.size
    if not 1 <= k <= p:
        raise ValueError(f"window size k={k} out of range for p={p}")
    s = prefix_sums(x)
    return np.asarray(s[k:] - s[:-k], dtype=float)


def sliding_mean(series: ArrayLike, k: int) -> StatSeries:
    """Window means: out[j] = (1/k) * sum of X over positions j+1..j+k."""
    return StatSeries(moving_sum(series, k) / k, kind="R_circ", k=k)


def sliding_centered_square(series: ArrayLike, k: int, sigma2: float) -> StatSeries:
    """Window means of X^2 - sigma2 (sign-insensitive signal statistic)."""
    if sigma2 <= 0:
        raise ValueError("sigma2 must be positive")
    x = _values(series)
    return StatSeries(moving_sum(x * x - sigma2, k) / k, kind="R_dagger", k=k)


def left_series(stat: StatSeries) -> StatSeries:
    """Left counterpart L[j] = R[j-k], defined for j = start+k .. start+p-k."""
    if stat.kind not in _LEFT_KIND:
        raise ValueError(f"statistic kind {stat.kind!r} has no left counterpart")
    n = stat.values.size
    if n <= stat.k:
        raise ValueError("series too short for a left counterpart")
    return StatSeries(
        stat.values[: n - stat.k],
        kind=_LEFT_KIND[stat.kind],
        k=stat.k,
        start=stat.start + stat.k,
    )


class UniformMaxResult(NamedTuple):
    m_hat: int
    value: float
    k_recommended: int


def uniform_max_stat(series: ArrayLike, sigma: float = 1.0, k_min: int | None = None) -> UniformMaxResult:
    """Window-size selection by maximizing sqrt(m) * max_j R[j] / sigma.

    Scans all window lengths m in [k_min, p] (k_min defaults to ceil(sqrt(p)))
    and returns the maximizing length, the attained value, and the
    recommended detection window k = floor(m_hat / 2). Ties break toward the
    smallest m, which localizes better.
    """
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    x = _values(series)
    p = x.size
    if k_min is None:
        k_min = int(math.ceil(math.sqrt(p)))
    k_min = max(1, k_min)
    if k_min > p:
        raise ValueError(f"k_min={k_min} exceeds sequence length {p}")
    s = prefix_sums(x)
    best_val = -math.inf
    best_m = k_min
    for m in range(k_min, p + 1):
        win_max = float(np.asarray(s[m:] - s[:-m], dtype=float).max())
        val = win_max / (math.sqrt(m) * sigma)
        if val > best_val:
            best_val = val
            best_m = m
    return UniformMaxResult(best_m, best_val, best_m // 2)
