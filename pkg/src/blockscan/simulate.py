"""Simulation harness: signal configurations, noise families, metrics, runner.

Replications draw their data from per-replication counter-based streams
keyed only by (seed, replication index), never by the method under test,
so different methods evaluated under the same seed see identical data and
a report is bit-identical regardless of how replications are scheduled.

Scoring conventions (per replication, averaged over replications):

* CER    = (false rejections + false acceptances) / p
* FDR    = false rejections / total rejections, with 0/0 := 0
* power  = true rejections / number of non-null indices (0 when there are
  no non-nulls)
* Diff   = mean |tau_hat_j - tau_j| over positionally matched break-points,
  defined only when the estimated and true counts agree; replications with
  a count mismatch are excluded from the Diff average.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

import numpy as np

from ._rng import derive_seed, stream
from .baselines import bh_procedure, one_sided_pvalues, yao_l1
from .detect import (detect_multi_one_sided, detect_multi_two_sided, detect_one_sided,
                     detect_two_sided)
from .types import DetectionResult, GroundTruth, Panel, Series, WindowConfig
from .variance import sigma2_order_stat

_TAG_DATA = 0
_TAG_CAL = 1

METHODS = (
    "proposed_one_sided",
    "proposed_two_sided",
    "proposed_multi_one",
    "proposed_multi_two",
    "yao",
    "bh",
)

CONFIG_KINDS = ("one_sided_table1", "two_sided_table3", "global_null", "custom")


# ---------------------------------------------------------------------------
# noise families


@dataclass(frozen=True)
class NoiseSpec:
    """A noise family plus any scale parameters.

    Named families (all unit variance except the kappa-standardized ones):

    * gauss            standard normal
    * t6_rescaled      t(6) / sqrt(1.5)
    * laplace_rescaled Laplace(0,1) / sqrt(2)
    * gauss_kappa1     N(0,1) / 2^0.25          (squared-noise scale 1)
    * t10_kappa1       t(10) / (75/16)^0.25
    * laplace_kappa1   Laplace(0,1) / 20^0.25
    * gauss_scaled     N(0,1) scaled by ``sigma`` (scalar or per-column array)
    """

    kind: str
    sigma: Union[float, np.ndarray, None] = None
    df: Optional[int] = None


_NAMED_NOISE = {
    "gauss": 1.0,
    "t6_rescaled": math.sqrt(1.5),
    "laplace_rescaled": math.sqrt(2.0),
    "gauss_kappa1": 2.0 ** 0.25,
    "t10_kappa1": (75.0 / 16.0) ** 0.25,
    "laplace_kappa1": 20.0 ** 0.25,
}


def noise_spec(noise: Union[str, NoiseSpec]) -> NoiseSpec:
    if isinstance(noise, NoiseSpec):
        return noise
    if noise in _NAMED_NOISE or noise == "gauss_scaled":
        return NoiseSpec(kind=noise)
    raise ValueError(f"unknown noise family {noise!r}")


def sample_noise(noise: Union[str, NoiseSpec], size, rng: np.random.Generator) -> np.ndarray:
    """Draw iid noise with the family's exact rescaling applied."""
    spec = noise_spec(noise)
    kind = spec.kind
    if kind == "gauss":
        return rng.standard_normal(size)
    if kind == "t6_rescaled":
        return rng.standard_t(6, size) / _NAMED_NOISE[kind]
    if kind == "laplace_rescaled":
        return rng.laplace(0.0, 1.0, size) / _NAMED_NOISE[kind]
    if kind == "gauss_kappa1":
        return rng.standard_normal(size) / _NAMED_NOISE[kind]
    if kind == "t10_kappa1":
        return rng.standard_t(10, size) / _NAMED_NOISE[kind]
    if kind == "laplace_kappa1":
        return rng.laplace(0.0, 1.0, size) / _NAMED_NOISE[kind]
    if kind == "gauss_scaled":
        if spec.sigma is None:
            raise ValueError("gauss_scaled needs a sigma")
        return rng.standard_normal(size) * np.asarray(spec.sigma, dtype=float)
    raise ValueError(f"unknown noise family {kind!r}")


def true_sigma2(noise: Union[str, NoiseSpec]) -> float:
    """Exact noise variance of a named family."""
    spec = noise_spec(noise)
    raw = {
        "gauss": 1.0,
        "t6_rescaled": 1.5,
        "laplace_rescaled": 2.0,
        "gauss_kappa1": 1.0,
        "t10_kappa1": 1.25,
        "laplace_kappa1": 2.0,
    }
    if spec.kind == "gauss_scaled":
        if np.ndim(spec.sigma) != 0:
            raise ValueError("per-column scales have no single variance")
        return float(spec.sigma) ** 2
    return raw[spec.kind] / _NAMED_NOISE[spec.kind] ** 2


def true_kappa2(noise: Union[str, NoiseSpec]) -> float:
    """Exact variance of Z^2 - sigma^2 (= E Z^4 - sigma^4) of a named family."""
    spec = noise_spec(noise)
    fourth = {
        "gauss": 3.0,
        "t6_rescaled": 13.5,       # 3 df^2 / ((df-2)(df-4)) at df=6
        "laplace_rescaled": 24.0,
        "gauss_kappa1": 3.0,
        "t10_kappa1": 6.25,        # 3 * 100 / (8 * 6)
        "laplace_kappa1": 24.0,
    }
    if spec.kind == "gauss_scaled":
        return 2.0 * true_sigma2(spec) ** 2
    c = _NAMED_NOISE[spec.kind]
    raw_var = {
        "gauss": 1.0, "t6_rescaled": 1.5, "laplace_rescaled": 2.0,
        "gauss_kappa1": 1.0, "t10_kappa1": 1.25, "laplace_kappa1": 2.0,
    }[spec.kind]
    return fourth[spec.kind] / c**4 - (raw_var / c**2) ** 2


# ---------------------------------------------------------------------------
# signal configurations


def make_signal(config_kind: str, p: int, custom: Optional[GroundTruth] = None) -> GroundTruth:
    """Mean sequence and break-points for a named configuration.

    one_sided_table1: 40% zeros, a linear ramp 0.4 -> 1.6 over the next
    10%, a mirrored descent back to 0.4, then zeros; break-points anchored
    at (1 + 0.4 p, 0.6 p). two_sided_table3: 30% zeros, a 10% block of
    -1/+1 alternating by global index parity, 20% zeros, 5% ramp
    0.5 -> 1.5, 5% ramp 1.5 -> 0.5, 30% zeros. Segment boundaries come
    from floor(fraction * p), and signal clusters occupy [tau_up, tau_down)
    so the mean is zero exactly off the clusters.
    """
    if config_kind == "custom":
        if custom is None:
            raise ValueError("config_kind 'custom' needs a GroundTruth")
        return custom
    if config_kind == "global_null":
        return GroundTruth(breakpoints=(), means=np.zeros(p))
    if p < 100:
        raise ValueError("named configurations need p >= 100")
    mu = np.zeros(p)
    if config_kind == "one_sided_table1":
        b1 = int(math.floor(0.4 * p))
        b2 = int(math.floor(0.5 * p))
        b3 = int(math.floor(0.6 * p))
        tau = (b1 + 1, b3)
        mu[b1:b2] = np.linspace(0.4, 1.6, b2 - b1)
        mu[b2 : b3 - 1] = np.linspace(1.6, 0.4, b3 - 1 - b2)
        return GroundTruth(breakpoints=tau, means=mu)
    if config_kind == "two_sided_table3":
        b = [int(math.floor(f * p)) for f in (0.3, 0.4, 0.6, 0.65, 0.7)]
        tau = (b[0] + 1, b[1] + 1, b[2] + 1, b[4] + 1)
        idx = np.arange(b[0] + 1, b[1] + 1)  # 1-based indices of the block
        mu[b[0] : b[1]] = np.where(idx % 2 == 1, -1.0, 1.0)
        mu[b[2] : b[3]] = np.linspace(0.5, 1.5, b[3] - b[2])
        mu[b[3] : b[4]] = np.linspace(1.5, 0.5, b[4] - b[3])
        return GroundTruth(breakpoints=tau, means=mu)
    raise ValueError(f"unknown config kind {config_kind!r}")


# ---------------------------------------------------------------------------
# metrics


@dataclass(frozen=True)
class Metrics:
    """Per-replication scores for one method."""

    cer: float
    fdr: float
    power: float
    l_hat: int
    diff: Optional[float]
    sigma2_hat: Optional[float]
    rejected: bool


def evaluate(detected_mask: np.ndarray, breakpoints: Optional[Sequence[int]],
             truth: GroundTruth, sigma2_hat: Optional[float] = None,
             rejected: bool = True, l_hat: Optional[int] = None) -> Metrics:
    """Score one replication against the ground truth.

    breakpoints=None means the method reports no positional break-point
    estimates (Diff undefined); l_hat then supplies the reported count.
    """
    p = truth.p
    true_mask = truth.signal_mask()
    fp = int(np.count_nonzero(detected_mask & ~true_mask))
    fn = int(np.count_nonzero(~detected_mask & true_mask))
    tp = int(np.count_nonzero(detected_mask & true_mask))
    n_rej = int(np.count_nonzero(detected_mask))
    n_signal = int(np.count_nonzero(true_mask))
    cer = (fp + fn) / p
    fdr = fp / n_rej if n_rej > 0 else 0.0
    power = tp / n_signal if n_signal > 0 else 0.0
    if breakpoints is None:
        count = int(l_hat) if l_hat is not None else 0
        diff = None
    else:
        bps = list(breakpoints)
        count = len(bps)
        diff = None
        if truth.l > 0 and count == truth.l:
            diff = float(np.mean([abs(b - t) for b, t in zip(bps, truth.breakpoints)]))
        elif truth.l == 0 and count == 0:
            diff = 0.0
    return Metrics(cer=cer, fdr=fdr, power=power, l_hat=count, diff=diff,
                   sigma2_hat=sigma2_hat, rejected=rejected)


def evaluate_result(result: DetectionResult, truth: GroundTruth) -> Metrics:
    """Score a detector result (clusters define the rejected index set)."""
    return evaluate(result.signal_mask(truth.p), result.breakpoints, truth,
                    sigma2_hat=result.sigma2_hat, rejected=result.rejected_null)


# ---------------------------------------------------------------------------
# configuration and runner


@dataclass(frozen=True)
class SimConfig:
    """One simulation scenario: data configuration, method, replications."""

    p: int
    config_kind: str
    noise: Union[str, NoiseSpec]
    reps: int
    window: WindowConfig
    method: str
    n: int = 1
    sigma_profile: Optional[np.ndarray] = None
    use_true_params: bool = False
    delta0: float = 1.0
    custom_truth: Optional[GroundTruth] = None

    def __post_init__(self):
        if self.reps < 1:
            raise ValueError("reps must be >= 1")
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}")
        if self.config_kind not in CONFIG_KINDS:
            raise ValueError(f"unknown config kind {self.config_kind!r}")
        if self.method.startswith("proposed_multi") and self.n < 2:
            raise ValueError("panel methods need n >= 2")


@dataclass(frozen=True)
class Aggregate:
    """Replication averages plus the mode of the break-point count."""

    cer: float
    fdr: float
    power: float
    sigma2_hat: float
    diff: Optional[float]
    l_mode: int
    l_mode_rate: float
    rejection_rate: float
    n_diff: int


@dataclass(frozen=True)
class SimReport:
    config: SimConfig
    per_rep: tuple[Metrics, ...]
    aggregate: Aggregate


def _aggregate(per_rep: Sequence[Metrics]) -> Aggregate:
    l_hats = [m.l_hat for m in per_rep]
    values, counts = np.unique(l_hats, return_counts=True)
    l_mode = int(values[np.argmax(counts)])
    diffs = [m.diff for m in per_rep if m.diff is not None]
    sigmas = [m.sigma2_hat for m in per_rep if m.sigma2_hat is not None]
    return Aggregate(
        cer=float(np.mean([m.cer for m in per_rep])),
        fdr=float(np.mean([m.fdr for m in per_rep])),
        power=float(np.mean([m.power for m in per_rep])),
        sigma2_hat=float(np.mean(sigmas)) if sigmas else float("nan"),
        diff=float(np.mean(diffs)) if diffs else None,
        l_mode=l_mode,
        l_mode_rate=float(np.max(counts) / len(l_hats)),
        rejection_rate=float(np.mean([m.rejected for m in per_rep])),
        n_diff=len(diffs),
    )


def _draw_data(cfg: SimConfig, truth: GroundTruth, rep: int, seed: int) -> np.ndarray:
    """Replication data; the stream key does not involve the method."""
    rng = stream(seed, _TAG_DATA, rep)
    shape = (cfg.n, cfg.p) if cfg.n > 1 else cfg.p
    if cfg.sigma_profile is not None:
        z = rng.standard_normal(shape) * np.asarray(cfg.sigma_profile, dtype=float)
    else:
        z = sample_noise(cfg.noise, shape, rng)
    return truth.means + z


def _window_for_rep(cfg: SimConfig, cal_seed: int) -> WindowConfig:
    w = cfg.window
    return WindowConfig(k=w.k, m=w.m, alpha=w.alpha, gamma=w.gamma, delta=w.delta,
                        mc_reps=w.mc_reps, seed=cal_seed)


def _run_method(cfg: SimConfig, x: np.ndarray, truth: GroundTruth,
                window: WindowConfig) -> Metrics:
    method = cfg.method
    if method == "proposed_one_sided":
        kw = {}
        if cfg.use_true_params:
            kw["sigma2"] = true_sigma2(cfg.noise)
        res = detect_one_sided(Series(x), window, **kw)
        return evaluate_result(res, truth)
    if method == "proposed_two_sided":
        kw = {}
        if cfg.use_true_params:
            kw["sigma2"] = true_sigma2(cfg.noise)
            kw["kappa2"] = true_kappa2(cfg.noise)
        res = detect_two_sided(Series(x), window, **kw)
        return evaluate_result(res, truth)
    if method == "proposed_multi_one":
        kw = {}
        if cfg.use_true_params and cfg.sigma_profile is not None:
            kw["sigma2"] = np.broadcast_to(
                np.asarray(cfg.sigma_profile, dtype=float) ** 2, (cfg.p,)).copy()
        res = detect_multi_one_sided(Panel(x), window, **kw)
        return evaluate_result(res, truth)
    if method == "proposed_multi_two":
        res = detect_multi_two_sided(Panel(x), window)
        return evaluate_result(res, truth)
    if method == "yao":
        fit = yao_l1(x, cfg.delta0)
        mask = np.zeros(cfg.p, dtype=bool)
        a, b = fit.cluster
        mask[a - 1 : b - 1] = True
        return evaluate(mask, fit.breakpoints, truth, rejected=True)
    if method == "bh":
        if cfg.use_true_params:
            sig = math.sqrt(true_sigma2(cfg.noise))
        else:
            m_est = window.m_effective
            sig = math.sqrt(sigma2_order_stat(x, m_est))
        rejected = bh_procedure(one_sided_pvalues(x, sig), window.alpha)
        mask = np.zeros(cfg.p, dtype=bool)
        mask[rejected - 1] = True
        # break-point count: twice the number of maximal runs of rejections
        runs = 0
        if rejected.size:
            runs = 1 + int(np.count_nonzero(np.diff(rejected) > 1))
        return evaluate(mask, None, truth, sigma2_hat=sig**2,
                        rejected=rejected.size > 0, l_hat=2 * runs)
    raise ValueError(f"unknown method {method!r}")


def run(cfg: SimConfig, seed: Optional[int] = None) -> SimReport:
    """Run the scenario's replications and aggregate the metrics.

    The master seed defaults to the window config's seed. Calibration
    inside the detectors uses a derived, replication-independent seed so
    calibrated cutoffs are shared (and cached) across replications.
    """
    master = cfg.window.seed if seed is None else seed
    truth = make_signal(cfg.config_kind, cfg.p, cfg.custom_truth)
    cal_seed = derive_seed(master, _TAG_CAL)
    window = _window_for_rep(cfg, cal_seed)
    per_rep = []
    for rep in range(cfg.reps):
        x = _draw_data(cfg, truth, rep, master)
        per_rep.append(_run_method(cfg, x, truth, window))
    return SimReport(config=cfg, per_rep=tuple(per_rep), aggregate=_aggregate(per_rep))


# ---------------------------------------------------------------------------
# table emission

_COLUMNS = ("label", "k", "sigma2", "cer", "cer_y", "l", "l_y", "diff", "diff_y",
            "fdr", "power")


def table_row(label: str, proposed: SimReport, yao: Optional[SimReport] = None) -> dict:
    """One emitted row combining a proposed-method report and its baseline."""
    a = proposed.aggregate
    row = {
        "label": label,
        "k": proposed.config.window.k,
        "sigma2": a.sigma2_hat,
        "cer": a.cer,
        "cer_y": yao.aggregate.cer if yao else None,
        "l": a.l_mode,
        "l_y": yao.aggregate.l_mode if yao else None,
        "diff": a.diff,
        "diff_y": yao.aggregate.diff if yao else None,
        "fdr": a.fdr,
        "power": a.power,
    }
    return row


def _fmt(value) -> str:
    if value is None:
        return "-"
    if isinstance(value, float):
        if math.isnan(value):
            return "-"
        return f"{value:.6g}"
    return str(value)


def format_table(rows: Sequence[dict]) -> str:
    """Aligned plain-text table with the standard column layout."""
    header = list(_COLUMNS)
    cells = [[_fmt(row.get(c)) for c in header] for row in rows]
    widths = [max(len(h), *(len(r[i]) for r in cells)) if cells else len(h)
              for i, h in enumerate(header)]
    lines = ["  ".join(h.ljust(w) for h, w in zip(header, widths)).rstrip()]
    for r in cells:
        lines.append("  ".join(v.ljust(w) for v, w in zip(r, widths)).rstrip())
    return "\n".join(lines) + "\n"


def write_tables(rows: Sequence[dict], prefix: str) -> list[str]:
    """Write the aligned text table and a CSV twin; returns the paths."""
    txt_path = f"{prefix}_table.txt"
    csv_path = f"{prefix}_table.csv"
    with open(txt_path, "w") as fh:
        fh.write(format_table(rows))
    with open(csv_path, "w") as fh:
        fh.write(",".join(_COLUMNS) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(row.get(c)) for c in _COLUMNS) + "\n")
    return [txt_path, csv_path]
