"""Scikit-learn style detector estimators.

The detectors follow the familiar two-step shape: ``fit(X)`` binds the signal
(and precomputes whatever is penalty-independent), ``predict()`` returns the
intermediate change point indices as an integer array. All constructor
parameters are plain attributes, so ``get_params`` / ``set_params`` / ``clone``
from scikit-learn work as usual.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator

from .bayes import (
    DistancePrior,
    GaussianConjugatePrior,
    cp_posterior,
    detect_peaks,
    map_paa_index,
)
from .costs import CostModel
from .peaks import select_peaks
from .search import SearchConfig, discrepancy_curve, pelt
from .series import ChangePointSet, TimeSeries, normalise, paa
from .validation import check_series


class PeltDetector(BaseEstimator):
    """Exact penalised search with a pluggable segment cost.

    Parameters mirror the cost model: ``cost`` picks the kind, ``gamma`` the
    regularisation weight (ridge/lasso), ``lags`` the AR order, ``min_size``
    the minimum segment length (per-kind default when None).
    """

    def __init__(self, cost: str = "l2", penalty: float = 10.0,
                 gamma: float = 1.0, lags: int = 4, min_size: int | None = None):
        self.cost = cost
        self.penalty = penalty
        self.gamma = gamma
        self.lags = lags
        self.min_size = min_size

    def _model(self) -> CostModel:
        return CostModel(self.cost, gamma=self.gamma, lags=self.lags,
                         min_size=self.min_size or 0)

    def fit(self, X, y=None):
        self.series_ = check_series(X)
        return self

    def predict(self, penalty: float | None = None) -> np.ndarray:
        beta = self.penalty if penalty is None else penalty
        cps, objective = pelt(self.series_, self._model(), SearchConfig(penalty=beta))
        self.objective_ = objective
        self.change_points_ = cps
        return np.asarray(cps.intermediate, dtype=int)

    def fit_predict(self, X, penalty: float | None = None) -> np.ndarray:
        return self.fit(X).predict(penalty)


class WindowDetector(BaseEstimator):
    """Approximate window-sliding search over discrepancy peaks."""

    def __init__(self, cost: str = "l2", penalty: float = 10.0,
                 half_width: int = 100, gamma: float = 1.0, lags: int = 4,
                 min_size: int | None = None):
        self.cost = cost
        self.penalty = penalty
        self.half_width = half_width
        self.gamma = gamma
        self.lags = lags
        self.min_size = min_size

    def fit(self, X, y=None):
        self.series_ = check_series(X)
        model = CostModel(self.cost, gamma=self.gamma, lags=self.lags,
                          min_size=self.min_size or 0)
        self.discrepancies_ = discrepancy_curve(self.series_, model, self.half_width)
        return self

    def predict(self, penalty: float | None = None) -> np.ndarray:
        beta = self.penalty if penalty is None else penalty
        idx = select_peaks(self.discrepancies_, beta, self.half_width)
        self.change_points_ = ChangePointSet(tuple(int(i) for i in idx),
                                             self.series_.shape[0])
        return np.asarray(self.change_points_.intermediate, dtype=int)

    def fit_predict(self, X, penalty: float | None = None) -> np.ndarray:
        return self.fit(X).predict(penalty)


class BayesianDetector(BaseEstimator):
    """Exact Bayesian posterior with peak-based MAP extraction.

    ``fit`` performs the heavy posterior computation (after optional PAA
    downsampling and z-scoring); ``predict`` only reruns the peak selection,
    so thresholds and distances can be steered interactively.
    """

    def __init__(self, prior: str = "flat", prior_p: float = 0.5, prior_r: int = 1,
                 k_max: int | None = None, threshold: float = 0.2,
                 distance: int = 10, paa_window: int = 1, epsilon: float = 1e-10,
                 mu0: float = 0.0, kappa0: float = 0.1, alpha0: float = 1.0,
                 beta0: float = 1.0):
        self.prior = prior
        self.prior_p = prior_p
        self.prior_r = prior_r
        self.k_max = k_max
        self.threshold = threshold
        self.distance = distance
        self.paa_window = paa_window
        self.epsilon = epsilon
        self.mu0 = mu0
        self.kappa0 = kappa0
        self.alpha0 = alpha0
        self.beta0 = beta0

    def fit(self, X, y=None):
        values = check_series(X)
        self.n_ = values.shape[0]
        self.constant_ = bool(np.all(values == values[0]))
        if self.constant_:
            self.cp_prob_ = np.zeros(self.n_)
            return self
        series = TimeSeries(values)
        reduced = paa(series, self.paa_window) if self.paa_window > 1 else series
        reduced = normalise(reduced)
        self.posterior_ = cp_posterior(
            reduced,
            prior=DistancePrior(self.prior, p=self.prior_p, r=self.prior_r),
            k_max=self.k_max, epsilon=self.epsilon,
            hyper=GaussianConjugatePrior(self.mu0, self.kappa0,
                                         self.alpha0, self.beta0))
        self.cp_prob_ = self.posterior_.cp_prob
        return self

    def predict(self, threshold: float | None = None,
                distance: int | None = None) -> np.ndarray:
        if self.constant_:
            self.change_points_ = ChangePointSet((), self.n_)
            return np.empty(0, dtype=int)
        thr = self.threshold if threshold is None else threshold
        dist = self.distance if distance is None else distance
        peaks = detect_peaks(self.cp_prob_, thr, dist)
        mapped = map_paa_index(peaks.intermediate, self.paa_window)
        points = sorted({int(np.clip(i, 1, self.n_ - 1)) for i in mapped})
        self.change_points_ = ChangePointSet(tuple(points), self.n_)
        return np.asarray(points, dtype=int)

    def fit_predict(self, X) -> np.ndarray:
        return self.fit(X).predict()
