"""Break-point detection: classification, smoothing, segmentation, location.

The pipeline shared by all detectors:

1. Threshold the windowed statistic R and its left counterpart L at gamma,
   giving a three-way label Q = 1(R > gamma) + 1(L > gamma) on the offsets
   where both are defined, then smooth Q by majority vote over a +-k window
   (truncated at the ends, ties toward the smallest label).
2. Split the offsets into W0/W1/W2 by smoothed label and take the maximal
   runs of W1 as transition components, tagged up (0 -> 2 flanks), down
   (2 -> 0), or spurious (equal flanks; these yield no break-point).
3. Inside each transition component, the break-point is the constrained
   argmax: for an up transition, maximize the score series subject to the
   left constraint being at most delta; symmetrically for a down
   transition. The reported index is the argmax offset plus one, i.e. the
   first index of the new regime.

The omnibus decision (is there any signal at all?) compares the global max
of R against a Monte Carlo calibrated cutoff; by default break-points are
located only when the omnibus test rejects.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from ._rng import derive_seed
from .calibration import quantile_max_g4, quantile_max_gcirc, quantile_max_gstar, transition_quantile
from .panel_stats import r_ddagger, r_flat, r_star, r4
from .types import DetectionResult, Panel, Series, WindowConfig, validate
from .variance import (estimate_noise, omega_hat, per_locus_variance, sigma2_order_stat,
                       u_stat_w)
from .windows import StatSeries, left_series, sliding_centered_square, sliding_mean

_DELTA_FALLBACK_FRACTION = 0.5


@dataclass(frozen=True)
class QSeries:
    """Three-way labels over statistic offsets start .. start+len-1."""

    q: np.ndarray
    start: int
    k: int
    smoothed: Optional[np.ndarray] = None

    def __post_init__(self):
        q = np.asarray(self.q, dtype=np.int8)
        q.setflags(write=False)
        object.__setattr__(self, "q", q)
        if self.smoothed is not None:
            s = np.asarray(self.smoothed, dtype=np.int8)
            s.setflags(write=False)
            object.__setattr__(self, "smoothed", s)

    @property
    def labels(self) -> np.ndarray:
        return self.smoothed if self.smoothed is not None else self.q


@dataclass(frozen=True)
class Component:
    """A maximal run of transition labels, with its flank direction."""

    offsets: np.ndarray
    direction: str  # "up", "down", or "spurious"


@dataclass(frozen=True)
class Segmentation:
    """W0/W1/W2 decomposition of the label domain plus the W1 components."""

    w0: np.ndarray
    w1: np.ndarray
    w2: np.ndarray
    components: tuple[Component, ...]
    start: int


def classify_q(r: StatSeries, l: StatSeries, gamma: float) -> QSeries:
    """Pointwise indicator sum on the common offset range of R and L."""
    if r.k != l.k:
        raise ValueError("R and L were computed with different window sizes")
    start = max(r.start, l.start)
    stop = min(r.stop, l.stop)
    if stop <= start:
        raise ValueError("R and L have no common offsets")
    rv = r.values[start - r.start : stop - r.start]
    lv = l.values[start - l.start : stop - l.start]
    q = (rv > gamma).astype(np.int8) + (lv > gamma).astype(np.int8)
    return QSeries(q=q, start=start, k=r.k)


def default_smooth_halfwidth(k: int) -> int:
    """Default majority-vote half-width.

    A half-width of k (the full statistic window) makes the vote window
    span an entire transition band plus both neighbors, which lets noise
    erode the core of short clusters; half the window keeps the vote local
    while still removing speckle.
    """
    return max(1, k // 2)


def majority_smooth(q: QSeries, halfwidth: Optional[int] = None) -> QSeries:
    """Majority vote over a +-halfwidth window, truncated at the ends.

    halfwidth defaults to default_smooth_halfwidth(k). Ties break toward
    the smallest label.
    """
    h = default_smooth_halfwidth(q.k) if halfwidth is None else int(halfwidth)
    if h < 1:
        raise ValueError("halfwidth must be >= 1")
    labels = q.q
    n = labels.size
    counts = np.zeros((3, n + 1), dtype=np.int64)
    for lab in range(3):
        counts[lab, 1:] = np.cumsum(labels == lab)
    lo = np.maximum(np.arange(n) - h, 0)
    hi = np.minimum(np.arange(n) + h, n - 1)
    window_counts = counts[:, hi + 1] - counts[:, lo]
    smoothed = np.argmax(window_counts, axis=0).astype(np.int8)
    return QSeries(q=q.q, start=q.start, k=q.k, smoothed=smoothed)


def segment(q: QSeries) -> Segmentation:
    """Maximal runs of label 1, tagged by their flanking labels.

    Runs flanked 0 -> 2 are up transitions, 2 -> 0 down transitions;
    equal flanks mark a spurious run (kept for diagnostics, no
    break-point). A missing flank at a domain end counts as label 0.
    """
    labels = q.labels
    n = labels.size
    offsets = np.arange(q.start, q.start + n)
    components: list[Component] = []
    i = 0
    while i < n:
        if labels[i] != 1:
            i += 1
            continue
        j = i
        while j + 1 < n and labels[j + 1] == 1:
            j += 1
        left = int(labels[i - 1]) if i > 0 else 0
        right = int(labels[j + 1]) if j + 1 < n else 0
        if left == 0 and right == 2:
            direction = "up"
        elif left == 2 and right == 0:
            direction = "down"
        else:
            direction = "spurious"
        components.append(Component(offsets=offsets[i : j + 1], direction=direction))
        i = j + 1
    return Segmentation(
        w0=offsets[labels == 0],
        w1=offsets[labels == 1],
        w2=offsets[labels == 2],
        components=tuple(components),
        start=q.start,
    )


def locate_breakpoint(component: Component, r: StatSeries, l: StatSeries, delta: float,
                      direction: Optional[str] = None,
                      r_score: Optional[StatSeries] = None,
                      l_score: Optional[StatSeries] = None) -> tuple[int, bool]:
    """Constrained argmax inside a transition component.

    Up: maximize the (score) R over offsets whose L is at most delta;
    down: maximize L subject to R <= delta. The optional score series
    replace R/L in the objective while the constraints stay on R/L.
    Returns (breakpoint, fallback) where breakpoint is the winning offset
    plus one and fallback marks an empty constraint set (unconstrained
    argmax used instead). Ties break toward the smallest offset.
    """
    js = component.offsets
    if js.size == 0:
        raise ValueError("component must be nonempty")
    direction = direction or component.direction
    r_score = r_score if r_score is not None else r
    l_score = l_score if l_score is not None else l
    if direction == "up":
        feasible = l.at(js) <= delta
        score = r_score.at(js)
    elif direction == "down":
        feasible = r.at(js) <= delta
        score = l_score.at(js)
    else:
        raise ValueError(f"cannot locate a break-point in a {direction!r} component")
    if feasible.any():
        cand = js[feasible]
        j_star = int(cand[np.argmax(score[feasible])])
        return j_star + 1, False
    j_star = int(js[np.argmax(score)])
    return j_star + 1, True


def _clusters_from_breakpoints(breakpoints: list[int], directions: list[str], p: int,
                               starts_in_signal: bool = False,
                               ends_in_signal: bool = False) -> tuple[tuple[int, int], ...]:
    """Pair up/down break-points into half-open [start, end) clusters.

    A leading down break-point opens a cluster at index 1 only when the
    smoothed labels actually begin in the signal state, and a trailing up
    break-point closes at p+1 only when they end in it; an orphan without
    that boundary evidence marks a lost transition and yields no cluster.
    """
    clusters: list[tuple[int, int]] = []
    open_tau: Optional[int] = None
    first = True
    for tau, direction in zip(breakpoints, directions):
        if direction == "up":
            if open_tau is None:
                open_tau = tau
        else:
            if open_tau is not None:
                clusters.append((open_tau, tau))
                open_tau = None
            elif first and starts_in_signal:
                clusters.append((1, tau))
        first = False
    if open_tau is not None and ends_in_signal:
        clusters.append((open_tau, p + 1))
    return tuple(clusters)


def _run_pipeline(r: StatSeries, l: StatSeries, p: int, gamma: float,
                  delta_source: Callable[[np.ndarray], Optional[float]],
                  delta_override: Optional[float],
                  smooth_halfwidth: Optional[int],
                  locate: bool,
                  r_score: Optional[StatSeries] = None,
                  l_score: Optional[StatSeries] = None):
    """Steps 1-3 shared by all detectors; returns the assembled pieces."""
    q = majority_smooth(classify_q(r, l, gamma), smooth_halfwidth)
    seg = segment(q)
    n_spurious = sum(1 for c in seg.components if c.direction == "spurious")
    breakpoints: list[int] = []
    directions: list[str] = []
    fallbacks: list[bool] = []
    delta: Optional[float] = None
    if locate:
        if delta_override is not None:
            delta = delta_override
        else:
            # The calibrated transition quantile, capped at gamma/2: the max
            # over a transition region sits too close to gamma to pin the
            # break-point tightly, and larger delta drags estimates toward
            # cluster interiors.
            cap = _DELTA_FALLBACK_FRACTION * gamma
            delta = delta_source(seg.w1)
            delta = cap if delta is None else min(delta, cap)
        located = []
        for comp in seg.components:
            if comp.direction == "spurious":
                # A transition band is at most about one window wide; a
                # spurious run wider than two windows can only be a cluster
                # whose interior labels eroded, so recover both of its
                # transitions. Narrow spurious runs yield no break-point.
                if comp.offsets.size > 2 * r.k:
                    tau_u, fb_u = locate_breakpoint(comp, r, l, delta, direction="up",
                                                    r_score=r_score, l_score=l_score)
                    tau_d, fb_d = locate_breakpoint(comp, r, l, delta, direction="down",
                                                    r_score=r_score, l_score=l_score)
                    if tau_u < tau_d:
                        located.append((tau_u, "up", fb_u))
                        located.append((tau_d, "down", fb_d))
                continue
            tau, fb = locate_breakpoint(comp, r, l, delta, r_score=r_score, l_score=l_score)
            located.append((tau, comp.direction, fb))
        located.sort()
        breakpoints = [t for t, _, _ in located]
        directions = [d for _, d, _ in located]
        fallbacks = [f for _, _, f in located]
    labels = q.labels
    clusters = _clusters_from_breakpoints(breakpoints, directions, p,
                                          starts_in_signal=bool(labels.size and labels[0] == 2),
                                          ends_in_signal=bool(labels.size and labels[-1] == 2))
    return q, seg, breakpoints, directions, fallbacks, clusters, delta, n_spurious


def detect_one_sided(series: Series, config: WindowConfig, *,
                     sigma2: Optional[float] = None,
                     smooth_halfwidth: Optional[int] = None,
                     localize_without_rejection: bool = False) -> DetectionResult:
    """End-to-end detector for positive-mean signal clusters.

    Estimates the noise variance (unless sigma2 is supplied), thresholds
    the window means at gamma = sigma_hat * g_{1-alpha}, and locates
    break-points inside the transition regions. The omnibus flag compares
    max R against the same cutoff.
    """
    series = validate(series if isinstance(series, Series) else Series(np.asarray(series, dtype=float)))
    p = series.p
    config.check_lengths(p)
    k = config.k
    s2 = sigma2 if sigma2 is not None else sigma2_order_stat(series.values, config.m_effective)
    sigma_hat = math.sqrt(s2)
    r = sliding_mean(series.values, k)
    l = left_series(r)
    g = quantile_max_gcirc(p, k, config.alpha, config.mc_reps, config.seed)
    gamma = config.gamma if config.gamma is not None else sigma_hat * g
    rejected = bool(r.values.max() > gamma)
    locate = rejected or localize_without_rejection
    delta_seed = derive_seed(config.seed, 1)

    def delta_source(w1: np.ndarray) -> Optional[float]:
        base = transition_quantile(w1, k, config.alpha, config.mc_reps, delta_seed, p=p)
        return None if base is None else sigma_hat * base

    q, seg, bps, dirs, fbs, clusters, delta, n_spur = _run_pipeline(
        r, l, p, gamma, delta_source, config.delta, smooth_halfwidth, locate=locate)
    return DetectionResult(
        rejected_null=rejected, breakpoints=tuple(bps), directions=tuple(dirs),
        clusters=clusters if locate else (), labels=q.labels, label_start=q.start,
        statistics={r.kind: r, l.kind: l}, gamma=gamma, delta=delta, g_quantile=g,
        sigma2_hat=s2, fallbacks=tuple(fbs), n_spurious=n_spur,
    )


def detect_two_sided(series: Series, config: WindowConfig, *,
                     sigma2: Optional[float] = None, kappa2: Optional[float] = None,
                     smooth_halfwidth: Optional[int] = None,
                     localize_without_rejection: bool = False) -> DetectionResult:
    """End-to-end detector for arbitrary-sign signal clusters.

    Works on window means of X^2 - sigma^2 so sign-alternating means
    cannot cancel; thresholds scale with the estimated noise scale kappa
    of the squared data.
    """
    series = validate(series if isinstance(series, Series) else Series(np.asarray(series, dtype=float)))
    p = series.p
    config.check_lengths(p)
    k = config.k
    clamped = False
    nu = None
    if sigma2 is None or kappa2 is None:
        est = estimate_noise(series.values, config.m_effective, with_kappa=True)
        nu = est.nu_hat
        if sigma2 is None:
            sigma2 = est.sigma2_hat
        if kappa2 is None:
            kappa2, clamped = est.kappa2_hat, est.kappa_clamped
    kappa_hat = math.sqrt(kappa2)
    r = sliding_centered_square(series.values, k, sigma2)
    l = left_series(r)
    g = quantile_max_gcirc(p, k, config.alpha, config.mc_reps, config.seed)
    gamma = config.gamma if config.gamma is not None else kappa_hat * g
    rejected = bool(r.values.max() > gamma)
    locate = rejected or localize_without_rejection
    delta_seed = derive_seed(config.seed, 1)

    def delta_source(w1: np.ndarray) -> Optional[float]:
        base = transition_quantile(w1, k, config.alpha, config.mc_reps, delta_seed, p=p)
        return None if base is None else kappa_hat * base

    q, seg, bps, dirs, fbs, clusters, delta, n_spur = _run_pipeline(
        r, l, p, gamma, delta_source, config.delta, smooth_halfwidth, locate=locate)
    return DetectionResult(
        rejected_null=rejected, breakpoints=tuple(bps), directions=tuple(dirs),
        clusters=clusters if locate else (), labels=q.labels, label_start=q.start,
        statistics={r.kind: r, l.kind: l}, gamma=gamma, delta=delta, g_quantile=g,
        sigma2_hat=sigma2, kappa2_hat=kappa2, nu_hat=nu, kappa_clamped=clamped,
        fallbacks=tuple(fbs), n_spurious=n_spur,
    )


def detect_multi_one_sided(panel: Panel, config: WindowConfig, *,
                           sigma2: Optional[np.ndarray] = None,
                           smooth_halfwidth: Optional[int] = None,
                           localize_without_rejection: bool = False) -> DetectionResult:
    """One-sided detector for n >= 2 realizations with per-column variances.

    The test statistic normalizes the window sum of column means by the
    window sum of (estimated) variances, so heteroscedastic noise is
    handled; break-points are located on the unnormalized companion
    statistic, whose mean is monotone across a transition.
    """
    panel = validate(panel if isinstance(panel, Panel) else Panel(np.asarray(panel, dtype=float)))
    n, p = panel.n, panel.p
    config.check_lengths(p)
    k = config.k
    mu_hat = panel.values.mean(axis=0)
    plug_in = sigma2 is None
    scale2 = per_locus_variance(panel.values) if plug_in else np.asarray(sigma2, dtype=float)
    r = r_star(mu_hat, scale2, n, k, plug_in=plug_in)
    l = left_series(r)
    sigma_arr = np.sqrt(scale2)
    g = quantile_max_gstar(sigma_arr, k, config.alpha, config.mc_reps, config.seed)
    gamma = config.gamma if config.gamma is not None else g
    rejected = bool(r.values.max() > gamma)
    locate = rejected or localize_without_rejection
    delta_seed = derive_seed(config.seed, 1)

    def delta_source(w1: np.ndarray) -> Optional[float]:
        return transition_quantile(w1, k, config.alpha, config.mc_reps, delta_seed,
                                   sigma=sigma_arr)

    rb = r_flat(mu_hat, n, k)
    lb = left_series(rb)
    q, seg, bps, dirs, fbs, clusters, delta, n_spur = _run_pipeline(
        r, l, p, gamma, delta_source, config.delta, smooth_halfwidth, locate=locate,
        r_score=rb, l_score=lb)
    return DetectionResult(
        rejected_null=rejected, breakpoints=tuple(bps), directions=tuple(dirs),
        clusters=clusters if locate else (), labels=q.labels, label_start=q.start,
        statistics={r.kind: r, l.kind: l, rb.kind: rb, lb.kind: lb},
        gamma=gamma, delta=delta, g_quantile=g,
        sigma2_hat=float(np.median(scale2)), fallbacks=tuple(fbs), n_spurious=n_spur,
    )


def detect_multi_two_sided(panel: Panel, config: WindowConfig, *,
                           sigma4: Optional[np.ndarray] = None,
                           variant: str = "chi2",
                           smooth_halfwidth: Optional[int] = None,
                           localize_without_rejection: bool = False) -> DetectionResult:
    """Two-sided detector for n >= 4 realizations via per-column pair averages.

    The pair-average statistic estimates the squared mean without bias, so
    no squared-noise scale is needed; fourth moments are estimated
    per-column and enter both the normalization and the calibrated cutoff.
    """
    panel = validate(panel if isinstance(panel, Panel) else Panel(np.asarray(panel, dtype=float)))
    n, p = panel.n, panel.p
    if n < 4:
        raise ValueError("need >=4 realizations for the two-sided panel detector")
    config.check_lengths(p)
    k = config.k
    w = u_stat_w(panel.values)
    plug_in = sigma4 is None
    scale4 = omega_hat(panel.values) if plug_in else np.asarray(sigma4, dtype=float)
    if np.any(scale4 <= 0):
        j = int(np.flatnonzero(scale4 <= 0)[0])
        raise ValueError(f"degenerate data: nonpositive fourth-moment estimate at column {j + 1}")
    r = r4(w, scale4, n, k, plug_in=plug_in)
    l = left_series(r)
    g = quantile_max_g4(scale4, k, config.alpha, config.mc_reps, config.seed,
                        variant=variant, n=n)
    gamma = config.gamma if config.gamma is not None else g
    rejected = bool(r.values.max() > gamma)
    locate = rejected or localize_without_rejection
    delta_seed = derive_seed(config.seed, 1)

    def delta_source(w1: np.ndarray) -> Optional[float]:
        return transition_quantile(w1, k, config.alpha, config.mc_reps, delta_seed,
                                   omega=scale4, n=n, variant=variant)

    rd = r_ddagger(w, n, k)
    ld = left_series(rd)
    q, seg, bps, dirs, fbs, clusters, delta, n_spur = _run_pipeline(
        r, l, p, gamma, delta_source, config.delta, smooth_halfwidth, locate=locate,
        r_score=rd, l_score=ld)
    return DetectionResult(
        rejected_null=rejected, breakpoints=tuple(bps), directions=tuple(dirs),
        clusters=clusters if locate else (), labels=q.labels, label_start=q.start,
        statistics={r.kind: r, l.kind: l, rd.kind: rd, ld.kind: ld},
        gamma=gamma, delta=delta, g_quantile=g, fallbacks=tuple(fbs), n_spurious=n_spur,
    )
