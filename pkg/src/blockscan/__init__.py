"""Detection and localization of clustered block signals in noisy sequences.

Windowed aggregation statistics with Monte Carlo calibrated cutoffs,
order-statistic noise estimation that tolerates unknown signal clusters,
break-point location inside transition regions, heteroscedastic
multi-realization variants, reference baselines, and a reproducible
simulation harness.
"""

from .types import (DetectionResult, GroundTruth, Panel, Series, WindowConfig, validate)
from .windows import (StatSeries, left_series, moving_sum, sliding_centered_square,
                      sliding_mean, uniform_max_stat)
from .variance import (VarianceEstimate, block_variance_sums, estimate_noise, kappa2_hat,
                       nu_order_stat, omega_hat, per_locus_variance, sigma2_order_stat,
                       u_stat_w)
from .calibration import (CutoffSpec, GumbelReference, gumbel_reference_quantile,
                          quantile_max_g4, quantile_max_gcirc, quantile_max_gstar,
                          transition_quantile)
from .panel_stats import PanelStats, panel_stats, r_ddagger, r_flat, r_star, r4
from .detect import (Component, QSeries, Segmentation, classify_q, detect_multi_one_sided,
                     detect_multi_two_sided, detect_one_sided, detect_two_sided,
                     locate_breakpoint, majority_smooth, segment)
from .baselines import (EpidemicFit, bh_procedure, one_sided_pvalues, two_sided_pvalues,
                        yao_l1)
from .simulate import (Metrics, NoiseSpec, SimConfig, SimReport, evaluate, evaluate_result,
                       make_signal, run, sample_noise, true_kappa2, true_sigma2)
from .genome_io import (ClusterReport, GenomeMap, GenomicRecord, emit_result,
                        make_synthetic_acgh, read_clusters, read_csv)

__version__ = "0.1.0"

__all__ = [
    "ClusterReport", "Component", "CutoffSpec", "DetectionResult", "EpidemicFit",
    "GenomeMap", "GenomicRecord", "GroundTruth", "GumbelReference", "Metrics",
    "NoiseSpec", "Panel", "PanelStats", "QSeries", "Segmentation", "Series",
    "SimConfig", "SimReport", "StatSeries", "VarianceEstimate", "WindowConfig",
    "bh_procedure", "block_variance_sums", "classify_q", "detect_multi_one_sided",
    "detect_multi_two_sided", "detect_one_sided", "detect_two_sided", "emit_result",
    "estimate_noise", "evaluate", "evaluate_result", "gumbel_reference_quantile",
    "kappa2_hat", "left_series", "locate_breakpoint", "majority_smooth", "make_signal",
    "make_synthetic_acgh", "moving_sum", "nu_order_stat", "omega_hat",
    "one_sided_pvalues", "panel_stats", "per_locus_variance", "quantile_max_g4",
    "quantile_max_gcirc", "quantile_max_gstar", "r4", "r_ddagger", "r_flat", "r_star",
    "read_clusters", "read_csv", "run", "sample_noise", "segment",
    "sigma2_order_stat", "sliding_centered_square", "sliding_mean",
    "transition_quantile", "true_kappa2", "true_sigma2", "two_sided_pvalues",
    "u_stat_w", "uniform_max_stat", "validate", "yao_l1",
]
