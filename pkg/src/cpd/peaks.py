"""Peak selection shared by the window search and the Bayesian pipeline."""

from __future__ import annotations

import numpy as np


def select_peaks(values: np.ndarray, threshold: float, min_distance: int) -> np.ndarray:
    """Indices of strict local maxima above ``threshold``, greedily kept in
    decreasing height order with a minimum index separation.

    A point qualifies only when strictly greater than both neighbours, so the
    first and last index are never peaks. Height ties are broken towards the
    lower index, keeping the selection deterministic.
    """
    v = np.asarray(values, dtype=float)
    if min_distance < 1:
        raise ValueError("min_distance must be >= 1")
    if v.size < 3:
        return np.empty(0, dtype=int)
    inner = np.arange(1, v.size - 1)
    is_peak = (v[inner] > v[inner - 1]) & (v[inner] > v[inner + 1]) & (v[inner] > threshold)
    candidates = inner[is_peak]
    if candidates.size == 0:
        return candidates
    order = candidates[np.lexsort((candidates, -v[candidates]))]
    kept: list[int] = []
    for idx in order:
        if all(abs(idx - other) >= min_distance for other in kept):
            kept.append(int(idx))
    return np.array(sorted(kept), dtype=int)
