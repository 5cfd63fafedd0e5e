"""Windowed statistics for multi-realization panels.

All statistics are O(p) via prefix sums. The variance-normalized family
(true scales or plug-in estimates) shares a single code path parameterized
by the scale array, so the two variants can be diffed directly in tests.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from .types import Panel
from .variance import omega_hat, per_locus_variance, u_stat_w
from .windows import StatSeries, moving_sum

PanelLike = Union[Panel, np.ndarray]

_DENOM_FLOOR = 1e-12


@dataclass(frozen=True)
class PanelStats:
    """Per-column summaries of an n x p panel."""

    mu_hat: np.ndarray
    sigma2_hat: np.ndarray
    w: np.ndarray
    omega_hat: Optional[np.ndarray]
    n: int

    @property
    def p(self) -> int:
        return self.mu_hat.size


def panel_stats(panel: PanelLike) -> PanelStats:
    """Column means, unbiased variances, pair averages, and (n>=4) fourth moments."""
    y = panel.values if isinstance(panel, Panel) else np.asarray(panel, dtype=float)
    n = y.shape[0]
    return PanelStats(
        mu_hat=y.mean(axis=0),
        sigma2_hat=per_locus_variance(y),
        w=u_stat_w(y),
        omega_hat=omega_hat(y) if n >= 4 else None,
        n=n,
    )


def _guard_denominator(window_sums: np.ndarray, what: str) -> None:
    bad = window_sums < _DENOM_FLOOR
    if bad.any():
        j = int(np.flatnonzero(bad)[0])
        raise ValueError(
            f"degenerate data: window {j} has nonpositive {what} sum "
            f"({window_sums[j]:.3e}); cannot normalize"
        )


def r_star(mu_hat: np.ndarray, scale2: np.ndarray, n: int, k: int,
           plug_in: bool = False) -> StatSeries:
    """Variance-normalized window sum of column means, times sqrt(n).

    scale2 holds per-column variances: true values give the oracle
    statistic, estimated values give the plug-in version (kind R_hat).
    """
    mu_hat = np.asarray(mu_hat, dtype=float)
    num = math.sqrt(n) * moving_sum(mu_hat, k)
    v = moving_sum(np.asarray(scale2, dtype=float), k)
    _guard_denominator(v, "variance")
    return StatSeries(num / np.sqrt(v), kind="R_hat" if plug_in else "R_star", k=k)


def r_flat(mu_hat: np.ndarray, n: int, k: int) -> StatSeries:
    """Unnormalized companion sqrt(n) * (window sum of means) / sqrt(k).

    Its expectation is monotone while a window slides into a signal
    cluster, which makes it the right objective for break-point location
    when per-column variances are unequal.
    """
    num = math.sqrt(n) * moving_sum(np.asarray(mu_hat, dtype=float), k)
    return StatSeries(num / math.sqrt(k), kind="R_flat", k=k)


def r4(w: np.ndarray, scale4: np.ndarray, n: int, k: int,
       plug_in: bool = False) -> StatSeries:
    """Normalized window sum of per-column pair averages.

    scale4 holds per-column squared variances (true sigma^4 or the
    unbiased plug-in); the sqrt(n(n-1)/2) factor standardizes the null
    marginals to unit variance.
    """
    if n < 2:
        raise ValueError("need >=2 realizations")
    num = math.sqrt(n * (n - 1) / 2.0) * moving_sum(np.asarray(w, dtype=float), k)
    denom = moving_sum(np.asarray(scale4, dtype=float), k)
    _guard_denominator(denom, "fourth-moment")
    return StatSeries(num / np.sqrt(denom), kind="R_star_j4" if plug_in else "R_j4", k=k)


def r_ddagger(w: np.ndarray, n: int, k: int) -> StatSeries:
    """Unnormalized companion of the pair-average statistic (for location)."""
    num = math.sqrt(n * (n - 1) / 2.0) * moving_sum(np.asarray(w, dtype=float), k)
    return StatSeries(num / math.sqrt(k), kind="R_ddagger", k=k)
