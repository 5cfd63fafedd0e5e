"""Monte Carlo cutoff calibration for the maxima of windowed noise processes.

Quantiles are estimated by simulating B independent paths of the relevant
process, taking each path's maximum over the window offsets, and reading
the empirical quantile by the conservative convention: the order statistic
at rank ceil((1-alpha) * B) of the sorted maxima.

Paths are drawn in fixed-size chunks, each chunk from its own counter-based
stream, and written to pre-allocated slots; results are therefore
bit-identical no matter how the chunks are scheduled. All processes share
the same stream layout, so calls with the same seed use common random
numbers: restricting the max to a subset of offsets on the same seed is
exactly a restriction of the same simulated paths, which makes the
restricted quantile monotone in the offset set and equal to the
unrestricted one on the full set.

Innovations are drawn in float32 (the generator's hot path) and window sums
are accumulated in float64.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional

import numpy as np

from ._rng import stream
from .windows import moving_sum

_CHUNK = 2048


@dataclass(frozen=True)
class CutoffSpec:
    """A calibrated cutoff: the (1-alpha) quantile of a simulated max."""

    g_quantile: float
    process_kind: str
    alpha: float
    mc_reps: int
    seed: int
    p: Optional[int] = None
    k: Optional[int] = None

    def __post_init__(self):
        if not math.isfinite(self.g_quantile):
            raise ValueError("g_quantile must be finite")
        if self.mc_reps < 100:
            raise ValueError("mc_reps must be at least 100")


def empirical_upper_quantile(samples: np.ndarray, alpha: float) -> float:
    """Conservative (1-alpha) quantile: sorted value at rank ceil((1-alpha)B)."""
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must be in (0, 1)")
    b = samples.size
    rank = int(math.ceil((1.0 - alpha) * b - 1e-9))
    rank = min(max(rank, 1), b)
    return float(np.sort(samples)[rank - 1])


def _check_window(p: int, k: int, B: int) -> None:
    if not 1 <= k <= p:
        raise ValueError(f"window size k={k} out of range for p={p}")
    if B < 100:
        raise ValueError("B must be at least 100")


def _restrict_offsets(restrict, p: int, k: int) -> np.ndarray:
    offs = np.asarray(sorted(int(j) for j in restrict), dtype=np.intp)
    if offs.size and (offs[0] < 0 or offs[-1] > p - k):
        raise ValueError(f"restricted offsets must lie in [0, {p - k}]")
    return offs


def _draw_normal_chunk(seed: int, chunk_index: int, rows: int, p: int) -> np.ndarray:
    return stream(seed, chunk_index).standard_normal((rows, p), dtype=np.float32)


def _draw_zeta_chunk(seed: int, chunk_index: int, rows: int, p: int, n: int) -> np.ndarray:
    # Exact null law of the standardized per-column pair average for
    # Gaussian panels: ((n-1) chi2_1 - chi2_{n-1}) / sqrt(2 n (n-1)).
    rng = stream(seed, chunk_index)
    z = (n - 1) * rng.chisquare(1, (rows, p)) - rng.chisquare(n - 1, (rows, p))
    z /= math.sqrt(2 * n * (n - 1))
    return z.astype(np.float32)


def _window_sums(chunk: np.ndarray, k: int) -> np.ndarray:
    s = np.cumsum(chunk, axis=1, dtype=np.float64)
    win = s[:, k - 1 :].copy()
    win[:, 1:] -= s[:, : chunk.shape[1] - k]
    return win


@lru_cache(maxsize=1)
def _gcirc_matrix(p: int, k: int, B: int, seed: int) -> np.ndarray:
    """All B simulated paths of the window-mean process, as float32 rows."""
    out = np.empty((B, p - k + 1), dtype=np.float32)
    for chunk_index, lo in enumerate(range(0, B, _CHUNK)):
        hi = min(lo + _CHUNK, B)
        draws = _draw_normal_chunk(seed, chunk_index, hi - lo, p)
        out[lo:hi] = _window_sums(draws, k) / k
    out.setflags(write=False)
    return out


@lru_cache(maxsize=2)
def _eta_tensor(p: int, B: int, seed: int) -> np.ndarray:
    """Raw standard-normal innovations, reused by the weighted processes."""
    out = np.empty((B, p), dtype=np.float32)
    for chunk_index, lo in enumerate(range(0, B, _CHUNK)):
        hi = min(lo + _CHUNK, B)
        out[lo:hi] = _draw_normal_chunk(seed, chunk_index, hi - lo, p)
    out.setflags(write=False)
    return out


@lru_cache(maxsize=2)
def _zeta_tensor(p: int, B: int, seed: int, n: int) -> np.ndarray:
    out = np.empty((B, p), dtype=np.float32)
    for chunk_index, lo in enumerate(range(0, B, _CHUNK)):
        hi = min(lo + _CHUNK, B)
        out[lo:hi] = _draw_zeta_chunk(seed, chunk_index, hi - lo, p, n)
    out.setflags(write=False)
    return out


def _weighted_maxima(weights: np.ndarray, k: int, B: int, seed: int,
                     restrict: Optional[np.ndarray], zeta_n: Optional[int]) -> np.ndarray:
    weights = np.asarray(weights, dtype=float)
    p = weights.size
    denom = np.sqrt(moving_sum(weights * weights, k))
    if np.any(denom <= 0):
        raise ValueError("window scale sums must be positive")
    draws = _eta_tensor(p, B, seed) if zeta_n is None else _zeta_tensor(p, B, seed, zeta_n)
    maxima = np.empty(B, dtype=float)
    for lo in range(0, B, _CHUNK):
        hi = min(lo + _CHUNK, B)
        g = _window_sums(draws[lo:hi] * weights, k)
        g /= denom
        if restrict is not None:
            g = g[:, restrict]
        maxima[lo:hi] = g.max(axis=1)
    return maxima


@lru_cache(maxsize=256)
def _gcirc_quantile(p: int, k: int, alpha: float, B: int, seed: int,
                    restrict_key: Optional[tuple]) -> float:
    gmat = _gcirc_matrix(p, k, B, seed)
    if restrict_key is None:
        maxima = gmat.max(axis=1)
    else:
        offs = _restrict_offsets(restrict_key, p, k)
        maxima = gmat[:, offs].max(axis=1)
    return empirical_upper_quantile(maxima.astype(float), alpha)


def quantile_max_gcirc(p: int, k: int, alpha: float, B: int, seed: int) -> float:
    """(1-alpha) quantile of the max over j of window means of iid N(0,1)."""
    _check_window(p, k, B)
    return _gcirc_quantile(int(p), int(k), float(alpha), int(B), int(seed), None)


def quantile_max_gstar(sigma: np.ndarray, k: int, alpha: float, B: int, seed: int) -> float:
    """(1-alpha) quantile of the max of the variance-normalized moving sum.

    The process is (sum of sigma_l * eta_l over a window) / sqrt(window sum
    of sigma_l^2); passing estimated scales gives the bootstrap plug-in
    version. Marginals have unit variance, so the scales enter only through
    the local covariance structure.
    """
    sigma = np.asarray(sigma, dtype=float)
    _check_window(sigma.size, k, B)
    if np.any(sigma <= 0):
        raise ValueError("all scale entries must be positive")
    return empirical_upper_quantile(_weighted_maxima(sigma, k, B, seed, None, None), alpha)


def quantile_max_g4(omega: np.ndarray, k: int, alpha: float, B: int, seed: int,
                    variant: str = "chi2", n: Optional[int] = None) -> float:
    """Cutoff for the panel pair-average statistic, weights sqrt(omega).

    variant="gaussian" drives the process with standard normal innovations;
    variant="chi2" uses the exact finite-n null law of the standardized
    per-column pair average for Gaussian panels (requires n).
    """
    omega = np.asarray(omega, dtype=float)
    _check_window(omega.size, k, B)
    if np.any(omega <= 0):
        raise ValueError("all fourth-moment entries must be positive")
    zeta_n = _zeta_arg(variant, n)
    maxima = _weighted_maxima(np.sqrt(omega), k, B, seed, None, zeta_n)
    return empirical_upper_quantile(maxima, alpha)


def _zeta_arg(variant: str, n: Optional[int]) -> Optional[int]:
    if variant == "gaussian":
        return None
    if variant == "chi2":
        if n is None or n < 2:
            raise ValueError("variant='chi2' needs the number of realizations n >= 2")
        return int(n)
    raise ValueError(f"unknown variant {variant!r}")


def transition_quantile(w1, k: int, alpha: float, B: int, seed: int, *,
                        p: Optional[int] = None, sigma: Optional[np.ndarray] = None,
                        omega: Optional[np.ndarray] = None, n: Optional[int] = None,
                        variant: str = "chi2") -> Optional[float]:
    """Quantile of the process max restricted to the offsets in w1.

    Used for the secondary threshold that pins break-points inside
    transition regions. Returns None when w1 is empty (callers fall back
    to a fraction of the primary threshold). With w1 equal to the full
    offset range this reproduces the unrestricted quantile exactly (same
    seed, same simulated paths).
    """
    w1 = sorted(int(j) for j in w1)
    if not w1:
        return None
    if sigma is not None:
        sigma = np.asarray(sigma, dtype=float)
        _check_window(sigma.size, k, B)
        if np.any(sigma <= 0):
            raise ValueError("all scale entries must be positive")
        offs = _restrict_offsets(w1, sigma.size, k)
        maxima = _weighted_maxima(sigma, k, B, seed, offs, None)
        return empirical_upper_quantile(maxima, alpha)
    if omega is not None:
        omega = np.asarray(omega, dtype=float)
        _check_window(omega.size, k, B)
        if np.any(omega <= 0):
            raise ValueError("all fourth-moment entries must be positive")
        offs = _restrict_offsets(w1, omega.size, k)
        maxima = _weighted_maxima(np.sqrt(omega), k, B, seed, offs, _zeta_arg(variant, n))
        return empirical_upper_quantile(maxima, alpha)
    if p is None:
        raise ValueError("need p for the plain process, or a scale array")
    _check_window(p, k, B)
    return _gcirc_quantile(int(p), int(k), float(alpha), int(B), int(seed), tuple(w1))


@dataclass(frozen=True)
class GumbelReference:
    """Closed-form extreme-value cutoff; reference only, never a default.

    The value approximates the (1-alpha) quantile of the max of
    sqrt(k) * (window mean of iid normals); its convergence is known to be
    very slow, so it is returned flagged and no detector uses it.
    """

    value: float
    v: float
    T: float
    reference_only: bool = True


def gumbel_reference_quantile(p: int, k: int, alpha: float) -> GumbelReference:
    """Literal evaluation of the extreme-value limit for the scaled max."""
    T = p / k
    if T <= 1:
        raise ValueError("requires p/k > 1")
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must be in (0, 1)")
    v = -math.log(math.log(1.0 / (1.0 - alpha)))
    log_t = math.log(T)
    value = math.sqrt(2.0 * log_t) * (
        1.0 + (math.log(log_t) - 0.5 * math.log(4.0 * math.pi)) / (4.0 * log_t) + v
    )
    return GumbelReference(value=value, v=v, T=T)
