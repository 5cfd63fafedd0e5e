"""Core domain types shared by all modules.

Conventions used throughout the package:

* All public sequence indices are 1-based; internal array storage is 0-based
  and the conversion happens exactly once at API boundaries.
* A break-point is reported as the first index of the new regime: the first
  signal index for an up-transition, the first non-signal index for a
  down-transition. A signal cluster bounded by break-points (a, b) therefore
  occupies the half-open index range [a, b).
* Validated values are immutable (arrays are frozen) and safe to share
  across threads.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np


def _freeze(a: np.ndarray) -> np.ndarray:
    a = np.asarray(a)
    a.setflags(write=False)
    return a


def _check_finite(values: np.ndarray, what: str) -> None:
    bad = ~np.isfinite(values)
    if bad.any():
        idx = int(np.flatnonzero(bad.ravel())[0])
        raise ValueError(f"{what} contains a non-finite value at index {idx + 1}")


@dataclass(frozen=True)
class Series:
    """One noisy realization of length p, with optional genomic coordinates."""

    values: np.ndarray
    positions: Optional[np.ndarray] = None
    label: str = ""

    def __post_init__(self):
        object.__setattr__(self, "values", np.asarray(self.values, dtype=float))
        if self.positions is not None:
            object.__setattr__(self, "positions", np.asarray(self.positions, dtype=np.int64))

    @property
    def p(self) -> int:
        return self.values.size


@dataclass(frozen=True)
class Panel:
    """n x p matrix of realizations; one row per realization."""

    values: np.ndarray
    labels: tuple[str, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "values", np.asarray(self.values, dtype=float))

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def p(self) -> int:
        return self.values.shape[1]


def validate(obj):
    """Check all type invariants of a Series or Panel and freeze it.

    Returns the same object; raises ValueError (with the offending 1-based
    index where applicable) when an invariant fails. Validation is
    idempotent.
    """
    if isinstance(obj, Series):
        if obj.values.ndim != 1:
            raise ValueError("series values must be one-dimensional")
        if obj.p < 2:
            raise ValueError("series needs at least 2 observations")
        _check_finite(obj.values, "series")
        if obj.positions is not None:
            if obj.positions.shape != obj.values.shape:
                raise ValueError("positions must match values in length")
            if not (np.diff(obj.positions) > 0).all():
                raise ValueError("positions must be strictly increasing")
            _freeze(obj.positions)
        _freeze(obj.values)
        return obj
    if isinstance(obj, Panel):
        if obj.values.ndim != 2:
            raise ValueError("panel values must be a 2-d matrix")
        if obj.n < 2:
            raise ValueError("need >=2 realizations")
        if obj.p < 2:
            raise ValueError("panel needs at least 2 columns")
        _check_finite(obj.values, "panel")
        _freeze(obj.values)
        return obj
    raise TypeError(f"cannot validate object of type {type(obj).__name__}")


@dataclass(frozen=True)
class GroundTruth:
    """True break-points and mean sequence used by simulations and scoring.

    ``breakpoints`` holds an even number of sorted 1-based indices
    tau_1 < ... < tau_l; the signal set is the union of [tau_1, tau_2),
    [tau_3, tau_4), ... and ``means`` is zero exactly off that set.
    """

    breakpoints: tuple[int, ...]
    means: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "breakpoints", tuple(int(t) for t in self.breakpoints))
        object.__setattr__(self, "means", _freeze(np.asarray(self.means, dtype=float)))
        p = self.means.size
        bps = self.breakpoints
        if len(bps) % 2 != 0:
            raise ValueError("breakpoints must come in up/down pairs (even count)")
        if any(b <= a for a, b in zip(bps, bps[1:])):
            raise ValueError("breakpoints must be strictly increasing")
        if bps and (bps[0] < 1 or bps[-1] > p):
            raise ValueError(f"breakpoints must lie in [1, {p}]")
        mask = self.signal_mask()
        if np.any(self.means[~mask] != 0.0):
            raise ValueError("means must be zero outside the signal set")
        if np.any(self.means[mask] == 0.0):
            raise ValueError("means must be nonzero on the signal set")

    @property
    def p(self) -> int:
        return self.means.size

    @property
    def l(self) -> int:
        return len(self.breakpoints)

    def signal_mask(self) -> np.ndarray:
        """Boolean mask (0-based) of the signal set."""
        mask = np.zeros(self.p, dtype=bool)
        for a, b in zip(self.breakpoints[0::2], self.breakpoints[1::2]):
            mask[a - 1 : b - 1] = True
        return mask


@dataclass(frozen=True)
class WindowConfig:
    """Tuning parameters of a detection run.

    gamma and delta are data-driven (Monte Carlo calibrated) when left unset;
    when both are set explicitly, delta < gamma is required.
    """

    k: int
    m: Optional[int] = None
    alpha: float = 0.05
    gamma: Optional[float] = None
    delta: Optional[float] = None
    mc_reps: int = 10_000
    seed: int = 0

    def __post_init__(self):
        if not 0.0 < self.alpha < 1.0:
            raise ValueError("alpha must be in (0, 1)")
        if self.mc_reps < 100:
            raise ValueError("mc_reps must be at least 100")
        if not 0 <= int(self.seed) < 2**64:
            raise ValueError("seed must fit in 64 bits")
        if self.gamma is not None and self.gamma < 0:
            raise ValueError("gamma must be nonnegative")
        if self.delta is not None and self.delta < 0:
            raise ValueError("delta must be nonnegative")
        if self.gamma is not None and self.delta is not None and not self.delta < self.gamma:
            raise ValueError("delta must be smaller than gamma")

    def check_lengths(self, p: int) -> None:
        """Validate the window sizes against a concrete sequence length."""
        if not 1 <= self.k <= p // 2:
            raise ValueError(f"window size k={self.k} must satisfy 1 <= k <= p/2 (p={p})")
        m = self.m if self.m is not None else self.k
        if not 1 <= m <= p:
            raise ValueError(f"estimator window m={m} must satisfy 1 <= m <= p (p={p})")

    @property
    def m_effective(self) -> int:
        return self.m if self.m is not None else self.k


@dataclass(frozen=True)
class DetectionResult:
    """Outcome of a detection run.

    clusters are 1-based half-open [start, end) intervals derived from
    consecutive (up, down) break-point pairs; labels holds the smoothed
    three-way classification over statistic offsets starting at label_start.
    """

    rejected_null: bool
    breakpoints: tuple[int, ...]
    directions: tuple[str, ...]
    clusters: tuple[tuple[int, int], ...]
    labels: np.ndarray
    label_start: int
    statistics: dict = field(default_factory=dict)
    gamma: float = float("nan")
    delta: Optional[float] = None
    g_quantile: float = float("nan")
    sigma2_hat: Optional[float] = None
    kappa2_hat: Optional[float] = None
    nu_hat: Optional[float] = None
    kappa_clamped: bool = False
    fallbacks: tuple[bool, ...] = ()
    n_spurious: int = 0

    def __post_init__(self):
        bps = self.breakpoints
        if any(b <= a for a, b in zip(bps, bps[1:])):
            raise ValueError("breakpoints must be strictly increasing")
        for a, b in zip(self.clusters, self.clusters[1:]):
            if a[1] > b[0]:
                raise ValueError("clusters must be disjoint and ordered")

    def signal_mask(self, p: int) -> np.ndarray:
        """Boolean mask (0-based) of the detected signal set."""
        mask = np.zeros(p, dtype=bool)
        for a, b in self.clusters:
            mask[max(a - 1, 0) : min(b - 1, p)] = True
        return mask
