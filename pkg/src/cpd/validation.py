"""Input validation helpers for the estimator layer."""

from __future__ import annotations

import numpy as np

from .series import TimeSeries


def check_series(X) -> np.ndarray:
    """Coerce to a finite 1-D float array with at least two samples.

    Accepts a ``TimeSeries``, a 1-D array-like, or a single-column 2-D array
    (the sklearn ``(n_samples, 1)`` convention).
    """
    if isinstance(X, TimeSeries):
        return X.values
    arr = np.asarray(X, dtype=float)
    if arr.ndim == 2 and arr.shape[1] == 1:
        arr = arr[:, 0]
    if arr.ndim != 1:
        raise ValueError(f"expected a univariate series, got shape {arr.shape}")
    if arr.shape[0] < 2:
        raise ValueError("series needs at least two samples")
    if not np.all(np.isfinite(arr)):
        raise ValueError("series values must be finite")
    return arr
