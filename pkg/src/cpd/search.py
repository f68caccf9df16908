"""Search strategies minimising the penalised segmentation objective.

``pelt`` is the exact pruned dynamic programme; ``dp_oracle`` is the same
dynamic programme without pruning, kept as a verification oracle; ``win`` is
the approximate window-sliding search selecting discrepancy peaks.

The objective for a candidate set of intermediate change points ``T`` is

    sum of segment costs  +  penalty * |T|

and both exact searches share one tie-break: on equal objective the smaller
last-change-point index wins, which makes their outputs comparable point for
point, not just by value.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .costs import CostModel, SegmentCostEvaluator, _as_values
from .errors import SeriesTooLong, SeriesTooShort
from .peaks import select_peaks
from .series import ChangePointSet

#: pruning slack keeping float-level ties alive; candidates worse than the
#: incumbent by more than this can never become optimal (cost subadditivity)
PRUNE_SLACK = 1e-9

#: guard rail for the O(n^2) unpruned oracle
DP_ORACLE_MAX_N = 2000


@dataclass(frozen=True)
class SearchConfig:
    """Knobs shared by the search strategies.

    Attributes:
        penalty: nonnegative per-change-point charge.
        half_width: window half width for ``win``.
        min_size: minimum segment length; defaults to the cost model's.
    """

    penalty: float
    half_width: int = 100
    min_size: int | None = None

    def __post_init__(self):
        if self.penalty < 0:
            raise ValueError("penalty must be nonnegative")
        if self.half_width < 1:
            raise ValueError("half_width must be positive")

    def resolve_min_size(self, model: CostModel) -> int:
        size = self.min_size if self.min_size is not None else model.min_size
        return max(size, model.min_size)


def _optimal_partition(values: np.ndarray, evaluator: SegmentCostEvaluator,
                       penalty: float, min_size: int,
                       prune: bool) -> tuple[list[int], float]:
    """Optimal-partition dynamic programme over admissible segmentations.

    ``F[t]`` is the best objective for the prefix ``y[:t]`` (the first segment
    pays the penalty too, offset by ``F[0] = -penalty``). Candidates enter once
    their segment can reach the minimum length; with ``prune`` they leave as
    soon as they can no longer start the optimal last segment. A candidate
    failing the pruning inequality at time t is only removed from time
    t + min_size onward: for nearer end points the competitor split at t is
    not admissible, so the candidate may still be needed there.
    """
    n = values.shape[0]
    if n < 2 * min_size:
        raise SeriesTooShort(f"need at least {2 * min_size} samples, got {n}")
    F = np.full(n + 1, np.inf)
    F[0] = -penalty
    prev = np.zeros(n + 1, dtype=int)
    never = n + 2
    cands = np.empty(n + 1, dtype=int)
    kill_at = np.full(n + 1, never, dtype=int)
    cands[0] = 0
    ncand = 1
    for t in range(min_size, n + 1):
        if prune:
            alive = kill_at[:ncand] > t
            if not np.all(alive):
                ncand = int(alive.sum())
                cands[:ncand] = cands[:alive.size][alive]
                kill_at[:ncand] = kill_at[:alive.size][alive]
        new_cand = t - min_size
        if new_cand >= min_size:
            cands[ncand] = new_cand
            kill_at[ncand] = never
            ncand += 1
        active = cands[:ncand]
        totals = F[active] + evaluator.cost_batch(active, t) + penalty
        best = int(np.argmin(totals))  # first minimum: smallest index on ties
        F[t] = totals[best]
        prev[t] = active[best]
        if prune:
            doomed = totals - penalty > F[t] + PRUNE_SLACK
            fresh = doomed & (kill_at[:ncand] == never)
            if fresh.any():
                kill_at[:ncand][fresh] = t + min_size
    points: list[int] = []
    t = n
    while t > 0:
        s = int(prev[t])
        if s > 0:
            points.append(s)
        t = s
    points.reverse()
    return points, float(F[n])


#: costs provably subadditive under segment splits (pruning stays exact).
#: The regularised kinds pay the slope penalty once per piece, so splitting a
#: straight line can cost more than keeping it whole; pruning is disabled for
#: them and the search falls back to the quadratic-time optimal partition.
PRUNABLE_KINDS = frozenset({"l2", "l1", "normal", "linreg", "ar"})


def pelt(ts, model: CostModel, cfg: SearchConfig) -> tuple[ChangePointSet, float]:
    """Exact search: global minimiser of the penalised objective.

    For subadditive costs the pruning rule never discards the optimum, so the
    result is identical to the unpruned ``dp_oracle`` (same tie-break) at a
    fraction of the work; for ``ridge`` and ``lasso`` pruning is switched off
    to preserve exactness.

    Returns the change point set and the achieved objective value.
    """
    values = _as_values(ts)
    evaluator = SegmentCostEvaluator(model, values)
    min_size = cfg.resolve_min_size(model)
    points, objective = _optimal_partition(values, evaluator, cfg.penalty,
                                           min_size,
                                           prune=model.kind in PRUNABLE_KINDS)
    return ChangePointSet(tuple(points), values.shape[0]), objective


def dp_oracle(ts, model: CostModel, penalty: float,
              min_size: int | None = None) -> tuple[ChangePointSet, float]:
    """Unpruned optimal-partition dynamic programme (verification oracle).

    Guarded to ``n <= 2000`` because it evaluates O(n^2) segment costs.
    """
    values = _as_values(ts)
    n = values.shape[0]
    if n > DP_ORACLE_MAX_N:
        raise SeriesTooLong(f"dp_oracle is limited to n <= {DP_ORACLE_MAX_N}")
    evaluator = SegmentCostEvaluator(model, values)
    size = min_size if min_size is not None else model.min_size
    points, objective = _optimal_partition(values, evaluator, penalty,
                                           max(size, model.min_size), prune=False)
    return ChangePointSet(tuple(points), n), objective


def discrepancy_curve(ts, model: CostModel, half_width: int) -> np.ndarray:
    """Cost saved by splitting each centred window at its middle.

    ``curve[t] = c(y[t-w:t+w]) - c(y[t-w:t]) - c(y[t:t+w])`` for positions
    ``w <= t <= n - w``; positions outside that range hold ``-inf``. The curve
    does not depend on the penalty, so penalty sweeps can reuse it.
    """
    values = _as_values(ts)
    n = values.shape[0]
    w = int(half_width)
    if w < model.min_size:
        raise ValueError(f"half_width {w} below the cost's min_size {model.min_size}")
    if n < 2 * w:
        raise SeriesTooShort(f"need at least {2 * w} samples for half_width {w}")
    evaluator = SegmentCostEvaluator(model, values)
    centres = np.arange(w, n - w + 1)
    disc = (evaluator.cost_batch(centres - w, centres + w)
            - evaluator.cost_batch(centres - w, centres)
            - evaluator.cost_batch(centres, centres + w))
    curve = np.full(n + 1, -np.inf)
    curve[w: n - w + 1] = disc
    return curve


def win(ts, model: CostModel, cfg: SearchConfig) -> ChangePointSet:
    """Window-sliding search: discrepancy peaks above the penalty.

    Peaks are strict local maxima of the discrepancy with value > penalty,
    kept greedily in decreasing height order with suppression radius equal to
    the window half width, so returned points are at least ``half_width``
    apart. The penalty plays the threshold role, keeping sweeps uniform
    across search strategies.
    """
    values = _as_values(ts)
    curve = discrepancy_curve(values, model, cfg.half_width)
    idx = select_peaks(curve, cfg.penalty, cfg.half_width)
    keep = idx[(idx > 0) & (idx < values.shape[0])]
    return ChangePointSet(tuple(int(i) for i in keep), values.shape[0])
