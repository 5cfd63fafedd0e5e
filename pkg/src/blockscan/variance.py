"""Nuisance-parameter estimation that is robust to unknown signal clusters.

Single-realization estimators take order statistics of moving-window
averages: because more than half of the sequence is assumed signal-free,
the median (or any lower quantile) of the window statistics ignores the
contaminated windows. Panel estimators are per-column moment formulas.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from .types import Panel, Series
from .windows import moving_sum

ArrayLike = Union[Series, np.ndarray, list, tuple]
PanelLike = Union[Panel, np.ndarray]


@dataclass(frozen=True)
class VarianceEstimate:
    """Bundle of noise-scale estimates from one series."""

    sigma2_hat: float
    m: int
    order_index: int
    nu_hat: Optional[float] = None
    kappa2_hat: Optional[float] = None
    kappa_clamped: bool = False


def _series_values(x: ArrayLike) -> np.ndarray:
    if isinstance(x, Series):
        return x.values
    return np.asarray(x, dtype=float)


def _panel_values(y: PanelLike) -> np.ndarray:
    if isinstance(y, Panel):
        return y.values
    y = np.asarray(y, dtype=float)
    if y.ndim != 2:
        raise ValueError("panel must be a 2-d matrix")
    return y


def _order_stat(values: np.ndarray, order_index: int, limit: int) -> float:
    if not 1 <= order_index <= limit:
        raise ValueError(
            f"order_index={order_index} outside the consistent range [1, {limit}]"
        )
    # Partial selection: O(p) average instead of a full sort.
    return float(np.partition(values, order_index - 1)[order_index - 1])


def sigma2_order_stat(series: ArrayLike, m: int, order_index: int | None = None) -> float:
    """Order statistic of moving-window mean squares.

    Consistent for the noise variance for any order_index <= floor(p'/2)
    with p' = p - m + 1, provided non-signal stretches make up more than
    half the sequence; the default is the median index floor(p'/2).
    """
    x = _series_values(series)
    p = x.size
    if not 1 <= m <= p:
        raise ValueError(f"estimator window m={m} out of range for p={p}")
    p_prime = p - m + 1
    limit = p_prime // 2 if p_prime >= 2 else 1
    if order_index is None:
        order_index = limit
    window_means = moving_sum(x * x, m) / m
    return _order_stat(window_means, order_index, limit)


def nu_order_stat(series: ArrayLike, m: int, order_index: int | None = None) -> float:
    """Order statistic of moving-window mean fourth powers of first differences.

    Estimates the fourth moment of a difference of two independent noise
    draws; unlike raw fourth powers, differencing removes the mean so the
    lower quantiles are not biased by skewed noise inside signal clusters.
    """
    x = _series_values(series)
    p = x.size
    if not 1 <= m <= p - 1:
        raise ValueError(f"estimator window m={m} out of range for p={p}")
    d4 = np.diff(x) ** 4
    window_means = moving_sum(d4, m) / m
    p_prime = p - m + 1
    limit = min(p_prime // 2 if p_prime >= 2 else 1, window_means.size)
    if order_index is None:
        order_index = limit
    return _order_stat(window_means, order_index, limit)


def kappa2_hat(nu_hat: float, sigma2_hat: float, floor_factor: float = 1e-6) -> tuple[float, bool]:
    """Second-moment scale of X^2 - sigma^2, from nu = 2*kappa^2 + 8*sigma^4.

    Returns (estimate, clamped). Negative raw values are clamped to
    floor_factor * sigma2_hat^2 so Monte Carlo pipelines survive rare bad
    draws; the flag is surfaced in detection results.
    """
    raw = nu_hat / 2.0 - 4.0 * sigma2_hat**2
    floor = floor_factor * sigma2_hat**2
    if raw < floor:
        return float(floor), True
    return float(raw), False


def estimate_noise(series: ArrayLike, m: int, order_index: int | None = None,
                   with_kappa: bool = False) -> VarianceEstimate:
    """Convenience bundle: sigma^2 (always) plus nu and kappa^2 on request."""
    x = _series_values(series)
    p_prime = x.size - m + 1
    oi = order_index if order_index is not None else (p_prime // 2 if p_prime >= 2 else 1)
    s2 = sigma2_order_stat(x, m, order_index)
    if not with_kappa:
        return VarianceEstimate(sigma2_hat=s2, m=m, order_index=oi)
    nu = nu_order_stat(x, m, order_index)
    k2, clamped = kappa2_hat(nu, s2)
    return VarianceEstimate(sigma2_hat=s2, m=m, order_index=oi, nu_hat=nu,
                            kappa2_hat=k2, kappa_clamped=clamped)


def per_locus_variance(panel: PanelLike) -> np.ndarray:
    """Classical unbiased per-column variance of an n x p panel (needs n >= 2)."""
    y = _panel_values(panel)
    if y.shape[0] < 2:
        raise ValueError("need >=2 realizations")
    return np.var(y, axis=0, ddof=1)


def block_variance_sums(sigma2: np.ndarray, k: int) -> np.ndarray:
    """Window sums of per-locus variances: v[j] = sum over positions j+1..j+k."""
    return moving_sum(np.asarray(sigma2, dtype=float), k)


def u_stat_w(panel: PanelLike) -> np.ndarray:
    """Unbiased per-column estimate of the squared mean (needs n >= 2).

    Average of all pairwise cross-products, computed in O(n) per column
    from the power sums: W = (S1^2 - S2) / (n (n-1)).
    """
    y = _panel_values(panel)
    n = y.shape[0]
    if n < 2:
        raise ValueError("need >=2 realizations")
    s1 = y.sum(axis=0)
    s2 = (y**2).sum(axis=0)
    return (s1**2 - s2) / (n * (n - 1))


def omega_hat(panel: PanelLike) -> np.ndarray:
    """Unbiased per-column estimate of sigma^4 (needs n >= 4).

    Equals the average of (Y_i - Y_i')^2 (Y_h - Y_h')^2 / 4 over all
    4-tuples of mutually distinct rows, evaluated in O(n) per column via
    power sums S_l = sum_i Y_i^l:

        [(n-1)(4 S3 S1 - n S4 - 3 S2^2) + (n S2 - S1^2)^2]
        / [n (n-1) (n-2) (n-3)]

    Always nonnegative up to roundoff, since every 4-tuple term is.
    """
    y = _panel_values(panel)
    n = y.shape[0]
    if n < 4:
        raise ValueError("need >=4 realizations")
    s1 = y.sum(axis=0)
    y2 = y * y
    s2 = y2.sum(axis=0)
    s3 = (y2 * y).sum(axis=0)
    s4 = (y2 * y2).sum(axis=0)
    num = (n - 1) * (4.0 * s3 * s1 - n * s4 - 3.0 * s2**2) + (n * s2 - s1**2) ** 2
    return num / (n * (n - 1) * (n - 2) * (n - 3))
