"""Segment cost functions for the penalised segmentation objective.

Seven parametric costs are provided: ``l2`` (quadratic deviation from the
segment mean), ``l1`` (absolute deviation from the segment median),
``normal`` (Gaussian likelihood with free mean and variance), ``linreg``
(simple linear regression residual), ``ar`` (autoregressive model residual),
and the Tikhonov-regularised ``ridge`` and ``lasso`` variants of ``linreg``.

Costs over a half-open index range ``[a, b)`` are evaluated in O(1) amortised
time from precomputed prefix statistics wherever a closed form exists; the
``SegmentCostEvaluator`` also exposes a vectorised batch path that the search
strategies rely on.

The regression costs use a single covariate: the sample-index time axis
(centred within the segment, so slopes are in units per sample and agree with
the slope over absolute time). The intercept is never penalised, so
regularisation only shrinks the slope. With this covariate a straight line
spanning several segments pays the slope penalty once per segment, which is
what makes the regularised costs prefer few segments on trending data.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateSegment, NoConvergence, SegmentTooShort
from .series import ChangePointSet, TimeSeries

COST_KINDS = ("l2", "l1", "normal", "linreg", "ar", "ridge", "lasso")

#: variance floor preventing log(0) in the Gaussian cost
VAR_FLOOR = 1e-12
#: numerical jitter added to AR normal-equation diagonals (not regularisation)
AR_JITTER = 1e-10
#: coordinate-descent convergence threshold on the largest coefficient update
LASSO_TOL = 1e-8
LASSO_MAX_SWEEPS = 1000


def default_min_size(kind: str, lags: int = 4) -> int:
    """Smallest segment length for which a cost kind is well defined."""
    if kind in ("l2", "l1", "normal"):
        return 2
    if kind in ("linreg", "ridge", "lasso"):
        return 3
    if kind == "ar":
        return lags + 2
    raise ValueError(f"unknown cost kind {kind!r}")


@dataclass(frozen=True)
class CostModel:
    """Configuration selecting one cost function and its parameters.

    Attributes:
        kind: one of ``COST_KINDS``.
        gamma: regularisation weight; only used by ``ridge`` and ``lasso``.
        lags: autoregressive order; only used by ``ar``.
        min_size: minimum segment length; defaults to the per-kind floor.
    """

    kind: str
    gamma: float = 1.0
    lags: int = 4
    min_size: int = field(default=0)

    def __post_init__(self):
        kind = self.kind.lower()
        if kind not in COST_KINDS:
            raise ValueError(f"unknown cost kind {self.kind!r}; expected one of {COST_KINDS}")
        object.__setattr__(self, "kind", kind)
        if self.gamma < 0:
            raise ValueError("gamma must be nonnegative")
        if self.lags < 1:
            raise ValueError("lags must be a positive integer")
        floor = default_min_size(kind, self.lags)
        if self.min_size == 0:
            object.__setattr__(self, "min_size", floor)
        elif self.min_size < floor:
            raise ValueError(f"min_size {self.min_size} below floor {floor} for {kind}")


def soft_threshold(value: float | np.ndarray, threshold: float):
    return np.sign(value) * np.maximum(np.abs(value) - threshold, 0.0)


def _as_values(ts) -> np.ndarray:
    if isinstance(ts, TimeSeries):
        return ts.values
    arr = np.asarray(ts, dtype=float)
    if arr.ndim != 1:
        raise ValueError("expected a univariate series")
    return arr


def _segment_x(m: int) -> np.ndarray:
    """Sample-index time covariate for an m-sample segment."""
    return np.arange(m, dtype=float)


def ridge_line_fit(segment: np.ndarray, gamma: float) -> tuple[float, float, float]:
    """Closed-form ridge fit of ``y ~ beta0 + beta * x`` on one segment.

    Returns ``(beta0, beta, cost)`` where cost is the penalised objective
    ``RSS + gamma * beta**2``. ``gamma = 0`` reduces to ordinary least squares.
    """
    y = np.asarray(segment, dtype=float)
    m = y.shape[0]
    x = _segment_x(m)
    xc = x - x.mean()
    yc = y - y.mean()
    sxx = float(xc @ xc)
    sxy = float(xc @ yc)
    beta = sxy / (sxx + gamma)
    beta0 = float(y.mean() - beta * x.mean())
    resid = yc - beta * xc
    cost = float(resid @ resid + gamma * beta * beta)
    return beta0, beta, cost


def lasso_line_fit(segment: np.ndarray, gamma: float, tol: float = LASSO_TOL,
                   max_sweeps: int = LASSO_MAX_SWEEPS) -> tuple[float, float, float]:
    """Coordinate-descent lasso fit of ``y ~ beta0 + beta * x`` on one segment.

    The covariate is centred, so the unpenalised intercept drops out of the
    sweep and is recovered afterwards. Each sweep performs the exact
    soft-thresholding update of the slope coordinate; convergence is declared
    once the largest coefficient update falls below ``tol``.

    Raises:
        NoConvergence: tolerance not reached within ``max_sweeps`` (the
            exception carries the best iterate and its objective).
    """
    y = np.asarray(segment, dtype=float)
    m = y.shape[0]
    x = _segment_x(m)
    xc = x - x.mean()
    yc = y - y.mean()
    sxx = float(xc @ xc)
    beta = 0.0
    for _ in range(max_sweeps):
        # residual with the slope coordinate removed, then exact update
        partial = float(xc @ (yc - beta * xc)) + beta * sxx
        new_beta = float(soft_threshold(partial, gamma / 2.0)) / sxx
        delta = abs(new_beta - beta)
        beta = new_beta
        if delta < tol:
            break
    else:
        resid = yc - beta * xc
        raise NoConvergence("lasso coordinate descent did not converge",
                            coef=beta,
                            objective=float(resid @ resid + gamma * abs(beta)))
    beta0 = float(y.mean() - beta * x.mean())
    resid = yc - beta * xc
    cost = float(resid @ resid + gamma * abs(beta))
    return beta0, beta, cost


def ar_fit(segment: np.ndarray, lags: int) -> tuple[np.ndarray, float]:
    """Least-squares AR fit on one segment; first ``lags`` samples are
    covariates only, never responses, so nothing is read across a boundary.

    Returns ``(coefficients, rss)`` with the intercept first.
    """
    y = np.asarray(segment, dtype=float)
    m = y.shape[0]
    if m < lags + 2:
        raise SegmentTooShort(f"AR({lags}) needs at least {lags + 2} samples")
    resp = y[lags:]
    design = np.column_stack([np.ones(m - lags)] +
                             [y[lags - i:m - i] for i in range(1, lags + 1)])
    gram = design.T @ design
    gram[np.diag_indices_from(gram)] += AR_JITTER
    coef = np.linalg.solve(gram, design.T @ resp)
    resid = resp - design @ coef
    return coef, float(resid @ resid)


class SegmentCostEvaluator:
    """Prefix-statistics cache answering segment-cost queries for one series.

    Immutable after construction; ``cost`` and ``cost_batch`` are pure and
    safe to call concurrently. The batch path never raises on degenerate
    segments: the Gaussian cost applies its variance floor instead, which is
    what the search strategies require.
    """

    def __init__(self, model: CostModel, series) -> None:
        self.model = model
        y = _as_values(series)
        self.values = y
        self.n = y.shape[0]
        self._c1 = np.concatenate([[0.0], np.cumsum(y)])
        self._c2 = np.concatenate([[0.0], np.cumsum(y * y)])
        kind = model.kind
        if kind in ("linreg", "ridge", "lasso"):
            self._cty = np.concatenate([[0.0], np.cumsum(np.arange(self.n) * y)])
        if kind == "ar":
            p = model.lags
            if self.n > p:
                lag = np.stack([y[p - i: self.n - i] for i in range(p + 1)])
                pads = np.zeros((p + 1, p + 1, p + 1))
                prods = np.cumsum(lag[:, None, :] * lag[None, :, :], axis=2)
                self._ar_prod = np.concatenate([pads, prods], axis=2)
                sums = np.cumsum(lag, axis=1)
                self._ar_sum = np.concatenate([np.zeros((p + 1, p + 1)), sums], axis=1)

    # -- scalar API ---------------------------------------------------------

    def cost(self, a: int, b: int) -> float:
        """Cost of the half-open segment ``[a, b)``.

        Raises:
            SegmentTooShort: fewer than ``model.min_size`` samples.
            DegenerateSegment: Gaussian cost on a (near-)zero-variance segment.
        """
        if not 0 <= a < b <= self.n:
            raise SegmentTooShort(f"invalid segment [{a}, {b}) for n={self.n}")
        if b - a < self.model.min_size:
            raise SegmentTooShort(
                f"segment [{a}, {b}) shorter than min_size {self.model.min_size}")
        if self.model.kind == "normal":
            m = b - a
            s1 = self._c1[b] - self._c1[a]
            syy = max(self._c2[b] - self._c2[a] - s1 * s1 / m, 0.0)
            if syy / m < VAR_FLOOR:
                raise DegenerateSegment(
                    f"segment [{a}, {b}) has variance below {VAR_FLOOR}")
        return float(self.cost_batch(np.array([a]), np.array([b]))[0])

    # -- batch API ----------------------------------------------------------

    def cost_batch(self, a, b) -> np.ndarray:
        """Vectorised costs for elementwise segment pairs ``[a_i, b_i)``."""
        a, b = np.broadcast_arrays(np.asarray(a, dtype=int), np.asarray(b, dtype=int))
        kind = self.model.kind
        if kind == "l2":
            return self._l2(a, b)
        if kind == "l1":
            return self._l1(a, b)
        if kind == "normal":
            return self._normal(a, b)
        if kind in ("linreg", "ridge"):
            gamma = self.model.gamma if kind == "ridge" else 0.0
            syy, sxy, sxx = self._line_stats(a, b)
            return np.maximum(syy - sxy * sxy / (sxx + gamma), 0.0)
        if kind == "lasso":
            return self._lasso(a, b)
        return self._ar_solve(a, b)

    def _l2(self, a, b) -> np.ndarray:
        m = (b - a).astype(float)
        s1 = self._c1[b] - self._c1[a]
        return np.maximum(self._c2[b] - self._c2[a] - s1 * s1 / m, 0.0)

    def _l1(self, a, b) -> np.ndarray:
        out = np.empty(a.shape, dtype=float)
        flat_a, flat_b, flat_out = a.ravel(), b.ravel(), out.ravel()
        y = self.values
        for i in range(flat_a.size):
            seg = np.sort(y[flat_a[i]:flat_b[i]])
            med = seg[(seg.size - 1) // 2]  # lower median: deterministic tie-break
            flat_out[i] = np.abs(seg - med).sum()
        return out

    def _normal(self, a, b) -> np.ndarray:
        m = (b - a).astype(float)
        syy = self._l2(a, b)
        var = np.maximum(syy / m, VAR_FLOOR)
        return m * np.log(var) + syy / var

    def _line_stats(self, a, b):
        """Centred (Syy, Sxy, Sxx) for the sample-index time covariate."""
        m = (b - a).astype(float)
        s1 = self._c1[b] - self._c1[a]
        syy = np.maximum(self._c2[b] - self._c2[a] - s1 * s1 / m, 0.0)
        # sum_j j * y[a + j] with j = 0..m-1, then centre both factors
        raw = (self._cty[b] - self._cty[a]) - a * s1
        sxy = raw - (m - 1) / 2.0 * s1
        sxx = m * (m * m - 1.0) / 12.0
        return syy, sxy, sxx

    def _lasso(self, a, b) -> np.ndarray:
        # Coordinate descent on centred statistics. The centred covariate is
        # orthogonal to the intercept, so the slope update is stationary after
        # the first sweep and the tolerance check ends the loop at sweep two.
        gamma = self.model.gamma
        syy, sxy, sxx = self._line_stats(a, b)
        beta = np.zeros_like(sxy)
        for _ in range(LASSO_MAX_SWEEPS):
            new_beta = soft_threshold(sxy, gamma / 2.0) / sxx
            delta = float(np.max(np.abs(new_beta - beta))) if beta.size else 0.0
            beta = new_beta
            if delta < LASSO_TOL:
                break
        cost = syy - 2.0 * beta * sxy + beta * beta * sxx + gamma * np.abs(beta)
        return np.maximum(cost, 0.0)

    def _ar_solve(self, a, b) -> np.ndarray:
        p = self.model.lags
        lo = a + p
        m = (b - lo).astype(float)
        flat_shape = a.shape
        gram_lags = np.moveaxis(self._ar_prod[:, :, b] - self._ar_prod[:, :, lo], (0, 1), (-2, -1))
        sums = np.moveaxis(self._ar_sum[:, b] - self._ar_sum[:, lo], 0, -1)  # (..., p+1)
        size = p + 1
        gram = np.empty(flat_shape + (size, size))
        gram[..., 0, 0] = m
        gram[..., 0, 1:] = sums[..., 1:]
        gram[..., 1:, 0] = sums[..., 1:]
        gram[..., 1:, 1:] = gram_lags[..., 1:, 1:]
        rhs = np.empty(flat_shape + (size,))
        rhs[..., 0] = sums[..., 0]
        rhs[..., 1:] = gram_lags[..., 0, 1:]
        yy = gram_lags[..., 0, 0]
        jittered = gram + AR_JITTER * np.eye(size)
        try:
            coef = np.linalg.solve(jittered, rhs[..., None])[..., 0]
        except np.linalg.LinAlgError:
            coef = (np.linalg.pinv(jittered) @ rhs[..., None])[..., 0]
        quad = np.einsum("...i,...ij,...j->...", coef, gram, coef)
        rss = yy - 2.0 * np.einsum("...i,...i->...", coef, rhs) + quad
        return np.maximum(rss, 0.0)


def segment_cost(model: CostModel, ts, a: int, b: int) -> float:
    """Cost of ``y[a:b]`` under ``model``; see ``SegmentCostEvaluator.cost``."""
    return SegmentCostEvaluator(model, ts).cost(a, b)


def cost_l2(ts, a: int, b: int) -> float:
    return segment_cost(CostModel("l2"), ts, a, b)


def cost_l1(ts, a: int, b: int) -> float:
    return segment_cost(CostModel("l1"), ts, a, b)


def cost_normal(ts, a: int, b: int) -> float:
    return segment_cost(CostModel("normal"), ts, a, b)


def cost_linreg(ts, a: int, b: int) -> float:
    return segment_cost(CostModel("linreg"), ts, a, b)


def cost_ar(ts, a: int, b: int, p: int = 4) -> float:
    return segment_cost(CostModel("ar", lags=p), ts, a, b)


def cost_ridge(ts, a: int, b: int, gamma: float) -> float:
    return segment_cost(CostModel("ridge", gamma=gamma), ts, a, b)


def cost_lasso(ts, a: int, b: int, gamma: float) -> float:
    values = _as_values(ts)
    if not 0 <= a < b <= values.shape[0] or b - a < 3:
        raise SegmentTooShort(f"invalid lasso segment [{a}, {b})")
    _, _, cost = lasso_line_fit(values[a:b], gamma)
    return cost


def sum_of_costs(model: CostModel, ts, cps: ChangePointSet) -> float:
    """Total cost of the segmentation induced by ``cps``."""
    ev = SegmentCostEvaluator(model, ts)
    return float(sum(ev.cost(a, b) for a, b in cps.segments()))
