"""Evaluation of a predicted segmentation against ground truth.

Counting follows the table convention of the literature: the artificial final
change point at ``n`` belongs to both point sets during evaluation, so the
reported prediction count ``k`` is the number of intermediates plus one. The
operations also accept plain index sequences, in which case they are used
verbatim (no endpoint is appended).
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import MismatchedLength
from .series import ChangePointSet


@dataclass(frozen=True)
class MetricsReport:
    """All scores for one (prediction, truth) pair.

    ``meantime`` is expressed in the time unit implied by the ``dt`` passed to
    ``evaluate`` (plain steps for the default ``dt = 1``). ``margin`` is the
    acceptance radius in time steps.
    """

    k_pred: int
    ae: int
    meantime: float
    precision: float
    recall: float
    f1: float
    rand_index: float
    margin: int

    def to_dict(self) -> dict:
        return {
            "k": self.k_pred,
            "ae": self.ae,
            "mt": self.meantime,
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
            "ri": self.rand_index,
            "margin": self.margin,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def _points(x) -> np.ndarray:
    """Evaluation point set: endpoint-inclusive for ChangePointSet inputs."""
    if isinstance(x, ChangePointSet):
        return x.points_with_endpoint()
    return np.sort(np.asarray(list(x), dtype=int))


def _check_same_n(pred, truth) -> None:
    if (isinstance(pred, ChangePointSet) and isinstance(truth, ChangePointSet)
            and pred.n != truth.n):
        raise MismatchedLength(f"segmentations refer to n={pred.n} vs n={truth.n}")


def annotation_error(pred, truth) -> int:
    """Absolute difference of the prediction counts."""
    _check_same_n(pred, truth)
    return abs(int(_points(pred).size) - int(_points(truth).size))


def meantime(pred, truth) -> float:
    """Mean distance from each predicted point to its nearest true point."""
    _check_same_n(pred, truth)
    p = _points(pred)
    t = _points(truth)
    if p.size == 0:
        return 0.0
    dists = np.abs(p[:, None] - t[None, :]).min(axis=1)
    return float(dists.mean())


def _sum_pairs(sizes: np.ndarray) -> int:
    return int((sizes * (sizes - 1) // 2).sum())


def rand_index(pred: ChangePointSet, truth: ChangePointSet) -> float:
    """Fraction of sample pairs on which the two segmentations agree.

    Computed in O(K_pred + K_truth) from the segment boundaries: the number
    of pairs grouped together by both partitions comes from the overlaps of
    the merged boundary sweep, and pairs separated by both follow by
    inclusion-exclusion. Unordered pairs over ``n (n - 1) / 2`` is used; the
    ordered-pair normalisation of the usual definition doubles numerator and
    denominator alike, so the two readings agree exactly.
    """
    _check_same_n(pred, truth)
    if not isinstance(pred, ChangePointSet) or not isinstance(truth, ChangePointSet):
        raise TypeError("rand_index needs full segmentations (ChangePointSet)")
    n = pred.n
    if n < 2:
        raise MismatchedLength("rand index needs n >= 2")
    merged = np.unique(np.concatenate([pred.boundaries(), truth.boundaries()]))
    both_same = _sum_pairs(np.diff(merged))
    pred_same = _sum_pairs(np.diff(np.asarray(pred.boundaries())))
    truth_same = _sum_pairs(np.diff(np.asarray(truth.boundaries())))
    total = n * (n - 1) // 2
    both_diff = total - pred_same - truth_same + both_same
    return (both_same + both_diff) / total


def precision_recall(pred, truth, margin: int) -> tuple[float, float]:
    """Fraction of matched points, acceptance radius ``margin`` (strict).

    A true point is matched when some prediction lies strictly closer than
    ``margin``. The matched count is the shared numerator: precision divides
    by the prediction count, recall by the truth count, so duplicate
    predictions near one true point dilute precision only. Empty sets give 0.
    """
    if margin < 0:
        raise ValueError("margin must be nonnegative")
    _check_same_n(pred, truth)
    p = _points(pred)
    t = _points(truth)
    if p.size == 0 or t.size == 0:
        return 0.0, 0.0
    matched = int((np.abs(t[:, None] - p[None, :]).min(axis=1) < margin).sum())
    return matched / p.size, matched / t.size


def f1(precision: float, recall: float) -> float:
    """Harmonic mean of precision and recall; 0 when both vanish."""
    if precision + recall == 0.0:
        return 0.0
    return 2.0 * precision * recall / (precision + recall)


def evaluate(pred: ChangePointSet, truth: ChangePointSet, margin: int,
             dt: float = 1.0) -> MetricsReport:
    """Bundle all metrics for one prediction.

    ``margin`` is the acceptance radius in time steps (the 1%-of-n convention
    is applied by the harness); ``dt`` converts the meantime into seconds for
    real datasets.
    """
    prec, rec = precision_recall(pred, truth, margin)
    return MetricsReport(
        k_pred=pred.k_reported,
        ae=annotation_error(pred, truth),
        meantime=meantime(pred, truth) * dt,
        precision=prec,
        recall=rec,
        f1=f1(prec, rec),
        rand_index=rand_index(pred, truth),
        margin=int(margin),
    )


def margin_from_fraction(n: int, pct: float = 1.0) -> int:
    """Acceptance radius as a percentage of the series length (>= 1 step)."""
    return max(1, round(n * pct / 100.0))
