"""Offline change point detection toolkit.

Penalised segmentation (exact PELT and approximate window search over seven
segment costs, including Tikhonov-regularised ones), exact Bayesian change
point posteriors, dataset simulators, evaluation metrics, sweep harnesses,
and an interactive HTTP service for steering detections.
"""

from .series import ChangePointSet, SignalBundle, TimeSeries, jump, load_csv, normalise, paa, write_csv
from .costs import (
    CostModel,
    SegmentCostEvaluator,
    cost_ar,
    cost_l1,
    cost_l2,
    cost_lasso,
    cost_linreg,
    cost_normal,
    cost_ridge,
    segment_cost,
    sum_of_costs,
)
from .search import SearchConfig, discrepancy_curve, dp_oracle, pelt, win
from .bayes import (
    DistancePrior,
    GaussianConjugatePrior,
    PosteriorResult,
    bayes_detect,
    cp_posterior,
    detect_peaks,
    fuse_user_belief,
    q_recursion,
    seg_marginal,
)
from .metrics import (
    MetricsReport,
    annotation_error,
    evaluate,
    f1,
    margin_from_fraction,
    meantime,
    precision_recall,
    rand_index,
)
from .simulate import SimSpec, generate
from .harness import (
    ExperimentConfig,
    SweepResult,
    aggregate_union,
    default_penalty_grid,
    gamma_sweep,
    penalty_sweep,
    run_experiment,
)
from .estimators import BayesianDetector, PeltDetector, WindowDetector
from . import errors

__version__ = "0.1.0"

__all__ = [
    "ChangePointSet", "SignalBundle", "TimeSeries", "jump", "load_csv",
    "normalise", "paa", "write_csv",
    "CostModel", "SegmentCostEvaluator", "cost_ar", "cost_l1", "cost_l2",
    "cost_lasso", "cost_linreg", "cost_normal", "cost_ridge", "segment_cost",
    "sum_of_costs",
    "SearchConfig", "discrepancy_curve", "dp_oracle", "pelt", "win",
    "DistancePrior", "GaussianConjugatePrior", "PosteriorResult",
    "bayes_detect", "cp_posterior", "detect_peaks", "fuse_user_belief",
    "q_recursion", "seg_marginal",
    "MetricsReport", "annotation_error", "evaluate", "f1",
    "margin_from_fraction", "meantime", "precision_recall", "rand_index",
    "SimSpec", "generate",
    "ExperimentConfig", "SweepResult", "aggregate_union",
    "default_penalty_grid", "gamma_sweep", "penalty_sweep", "run_experiment",
    "BayesianDetector", "PeltDetector", "WindowDetector",
    "errors",
    "__version__",
]
