"""Exact Bayesian offline change point detection.

The building blocks are the segment marginal likelihood ``P(t, s)`` (samples
``t..s`` form one segment, parameters integrated out under a conjugate prior)
and the tail likelihoods ``Q_j^(k)(i)`` (data from ``i`` onward given that the
j-th of k change points sits at ``i - 1``). Everything runs in log space with
log-sum-exp accumulation, so no underflow occurs for any practical length.

``Q_j^(k)`` depends on ``(k, j)`` only through the number of change points
still ahead, ``m = k - j``. The implementation therefore computes one family
of tail arrays ``R_m`` with

    R_0(i) = P(i, n)
    R_m(i) = sum_s P(i, s) * pi(s - i + 1) * R_{m-1}(s + 1),   i <= s <= n - m

where ``pi`` is the distance prior on gaps between consecutive change points;
``Q_j^(k) = R_{k-j}`` and the per-k evidence is ``Q^(k)(1) = R_k(1)``. Each
change point contributes exactly one prior factor, the gap to its predecessor
(with the virtual predecessor at 0), so the evidence is the sum over all
segmentations with k change points of the product of segment marginals times
the product of gap priors.

Per-position probabilities come from k-independent forward arrays

    A_1(s) = P(1, s) * pi(s)
    A_j(s) = sum_r A_{j-1}(r) * P(r+1, s) * pi(s - r)

giving ``Pr(tau_j = s | y, k) = A_j(s) R_{k-j}(s+1) / R_k(1)``; summing over j
and averaging over k (uniform prior on k, weighted by evidence) yields the
change-point probability curve that peak selection consumes.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence
import warnings

import numpy as np
from scipy.special import gammaln, logsumexp

from .errors import DegenerateBeliefWarning
from .peaks import select_peaks
from .series import ChangePointSet, TimeSeries, normalise, paa

DEFAULT_EPSILON = 1e-10
DEFAULT_THRESHOLD = 0.2
DEFAULT_DISTANCE = 10


@dataclass(frozen=True)
class GaussianConjugatePrior:
    """Normal-Inverse-Gamma prior on a segment's mean and variance.

    The defaults suit z-scored data: a weakly informative, location-symmetric
    prior centred at zero. With these hyperparameters the segment marginal
    likelihood is a closed-form Student-t expression.
    """

    mu0: float = 0.0
    kappa0: float = 0.1
    alpha0: float = 1.0
    beta0: float = 1.0

    def __post_init__(self):
        if self.kappa0 <= 0 or self.alpha0 <= 0 or self.beta0 <= 0:
            raise ValueError("kappa0, alpha0 and beta0 must be positive")

    def log_marginal(self, m, total, total_sq):
        """Log marginal likelihood from a segment's sufficient statistics.

        Accepts scalars or aligned arrays ``(m, sum y, sum y^2)``.
        """
        m = np.asarray(m, dtype=float)
        mean = total / m
        ss = np.maximum(total_sq - total * total / m, 0.0)
        kappa_m = self.kappa0 + m
        alpha_m = self.alpha0 + m / 2.0
        beta_m = (self.beta0 + ss / 2.0
                  + self.kappa0 * m * (mean - self.mu0) ** 2 / (2.0 * kappa_m))
        return (0.5 * (np.log(self.kappa0) - np.log(kappa_m))
                + gammaln(alpha_m) - gammaln(self.alpha0)
                + self.alpha0 * np.log(self.beta0) - alpha_m * np.log(beta_m)
                - m / 2.0 * np.log(2.0 * np.pi))


@dataclass(frozen=True)
class DistancePrior:
    """Point-process prior on the gap between consecutive change points.

    ``flat`` assigns 1/n to every gap; ``geometric`` has success probability
    ``p`` on support d >= 1; ``negative_binomial`` shifts NB(r, p) onto d >= 1.
    """

    kind: str = "flat"
    p: float = 0.5
    r: int = 1

    def __post_init__(self):
        kind = self.kind.lower().replace("-", "_")
        if kind not in ("flat", "geometric", "negative_binomial"):
            raise ValueError(f"unknown distance prior {self.kind!r}")
        object.__setattr__(self, "kind", kind)
        if kind != "flat" and not 0.0 < self.p < 1.0:
            raise ValueError("p must lie in (0, 1)")
        if kind == "negative_binomial" and self.r < 1:
            raise ValueError("r must be a positive integer")

    def log_pmf(self, gaps, n: int) -> np.ndarray:
        """Log prior mass for integer gaps (d >= 1); -inf for d < 1."""
        d = np.asarray(gaps, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            if self.kind == "flat":
                out = np.full(d.shape, -np.log(n), dtype=float)
            elif self.kind == "geometric":
                out = (d - 1.0) * np.log(1.0 - self.p) + np.log(self.p)
            else:
                x = d - 1.0  # failures before the r-th success
                out = (gammaln(x + self.r) - gammaln(x + 1.0) - gammaln(self.r)
                       + self.r * np.log(self.p) + x * np.log(1.0 - self.p))
        return np.where(d >= 1.0, out, -np.inf)


FLAT_PRIOR = DistancePrior("flat")


def _series_values(ts) -> np.ndarray:
    if isinstance(ts, TimeSeries):
        return ts.values
    return np.asarray(ts, dtype=float)


def seg_marginal(ts, t: int, s: int,
                 hyper: GaussianConjugatePrior = GaussianConjugatePrior()) -> float:
    """Log marginal likelihood that samples ``t..s`` (1-indexed, inclusive)
    form a single Gaussian segment under the conjugate prior.

    Defined for every segment, including length one, where it reduces to the
    prior-predictive Student-t density at the sample.
    """
    y = _series_values(ts)
    n = y.shape[0]
    if not 1 <= t <= s <= n:
        raise ValueError(f"need 1 <= t <= s <= {n}, got ({t}, {s})")
    seg = y[t - 1: s]
    return float(hyper.log_marginal(seg.size, seg.sum(), (seg * seg).sum()))


def _log_marginal_table(y: np.ndarray, hyper: GaussianConjugatePrior) -> np.ndarray:
    """Upper-triangular ``logP[t, s]`` for 1 <= t <= s <= n (else -inf)."""
    n = y.shape[0]
    table = np.full((n + 2, n + 2), -np.inf)
    for t in range(1, n + 1):
        seg = y[t - 1:]
        m = np.arange(1, seg.size + 1)
        table[t, t: n + 1] = hyper.log_marginal(m, np.cumsum(seg),
                                                np.cumsum(seg * seg))
    return table


def _transition_matrix(log_p: np.ndarray, log_pi: np.ndarray) -> np.ndarray:
    """``base[i-1, s-1] = log P(i, s) + log pi(s - i + 1)`` for i, s in 1..n.

    One segment of the chain: the previous change point sits at ``i - 1`` and
    the next at ``s``. Entries with ``s < i`` are ``-inf``. Both recursions
    (tail and forward) are log-sum-exp products with this matrix.
    """
    n = log_p.shape[0] - 2
    idx = np.arange(1, n + 1)
    gaps = idx[None, :] - idx[:, None] + 1  # s - i + 1
    return log_p[1: n + 1, 1: n + 1] + log_pi[np.clip(gaps, 0, n + 1)]


def _tail_arrays(base: np.ndarray, log_p: np.ndarray, k_max: int,
                 epsilon: float) -> np.ndarray:
    """``R[m][i]`` tail log-likelihoods for m = 0..k_max (see module doc).

    Truncation: for each sum, the trailing terms whose combined relative
    contribution is below ``epsilon`` are dropped. When the terms decay along
    the position axis this coincides with stopping at the first negligible
    term; unlike the sequential stopping rule it stays sound when terms rise
    again later (segments much tighter than the prior scale can push the
    per-sample density far above one), so the truncation error is bounded by
    ``epsilon`` on every input.
    """
    n = log_p.shape[0] - 2
    log_eps = np.log(epsilon) if epsilon > 0 else -np.inf
    R = np.full((k_max + 1, n + 2), -np.inf)
    R[0, 1: n + 1] = log_p[1: n + 1, n]
    for m in range(1, k_max + 1):
        hi = n - m  # largest admissible position for the next change point
        if hi < 1:
            break
        terms = base[:hi, :hi] + R[m - 1, 2: hi + 2][None, :]
        suffix = np.logaddexp.accumulate(terms[:, ::-1], axis=1)[:, ::-1]
        if log_eps == -np.inf:
            R[m, 1: hi + 1] = suffix[:, 0]
            continue
        total = suffix[:, 0]
        negligible = suffix < total[:, None] + log_eps
        kept = np.where(negligible, -np.inf, terms)
        R[m, 1: hi + 1] = logsumexp(kept, axis=1)
    return R


def _forward_arrays(base: np.ndarray, j_max: int) -> np.ndarray:
    """``A[j][s]`` forward log-probabilities of (prefix data, tau_j = s)."""
    n = base.shape[0]
    A = np.full((j_max + 1, n + 2), -np.inf)
    A[1, 1: n] = base[0, : n - 1]  # P(1, s) * pi(s)
    if j_max < 2:
        return A
    trans = base[1: n, : n - 1]  # transition r -> s over r, s in 1..n-1
    for j in range(2, j_max + 1):
        A[j, 1: n] = logsumexp(trans + A[j - 1, 1: n, None], axis=0)
    return A


@dataclass(frozen=True)
class QRecursion:
    """Tail arrays for a fixed assumed number of change points ``k``.

    ``q(j)[i]`` is ``Q_j^(k)(i)`` in log space; ``q(0)[1]`` is the evidence
    ``Q^(k)(1)``, the total marginal likelihood of the data given k change
    points.
    """

    k: int
    tails: np.ndarray  # rows m = 0..k of R; q(j) = tails[k - j]

    def q(self, j: int) -> np.ndarray:
        if not 0 <= j <= self.k:
            raise ValueError(f"j must lie in [0, {self.k}]")
        return self.tails[self.k - j]

    @property
    def log_evidence(self) -> float:
        return float(self.tails[self.k][1])


def q_recursion(ts, prior: DistancePrior, k: int,
                epsilon: float = DEFAULT_EPSILON,
                hyper: GaussianConjugatePrior = GaussianConjugatePrior()) -> QRecursion:
    """Backward recursion for the tail likelihoods with term truncation."""
    y = _series_values(ts)
    n = y.shape[0]
    if not 1 <= k <= n - 1:
        raise ValueError(f"k must lie in [1, {n - 1}]")
    log_p = _log_marginal_table(y, hyper)
    log_pi = prior.log_pmf(np.arange(n + 2), n)
    base = _transition_matrix(log_p, log_pi)
    return QRecursion(k, _tail_arrays(base, log_p, k, epsilon))


@dataclass(frozen=True)
class PosteriorResult:
    """Posterior tables plus the aggregated change-point probability curve.

    ``cp_prob[t]`` is the probability that position ``t`` (a boundary before
    sample ``t``) is a change point, averaged over the assumed count k with
    evidence weights. ``log_q[m]`` holds the tail array ``R_m``; the tail of
    the j-th of k change points is ``log_q[k - j]``.
    """

    log_p: np.ndarray
    log_q: np.ndarray
    cp_prob: np.ndarray
    k_max: int
    epsilon: float
    log_evidence: np.ndarray  # per-k evidence, index k-1
    k_weights: np.ndarray

    @property
    def n(self) -> int:
        return self.cp_prob.shape[0]

    def marginal(self, k: int, j: int) -> np.ndarray:
        """Posterior of the j-th of k change points over positions 0..n-1."""
        if not 1 <= j <= k <= self.k_max:
            raise ValueError("need 1 <= j <= k <= k_max")
        out = np.zeros(self.n)
        evidence = self.log_evidence[k - 1]
        if evidence == -np.inf:
            return out
        positions = np.arange(1, self.n)
        out[1:] = np.exp(self._forward[j, positions]
                         + self.log_q[k - j, positions + 1] - evidence)
        return out

    # populated right after construction; kept out of __init__ for frozen ease
    _forward: np.ndarray = field(default=None, repr=False, compare=False)


def cp_posterior(ts, prior: DistancePrior = FLAT_PRIOR, k_max: int | None = None,
                 epsilon: float = DEFAULT_EPSILON,
                 hyper: GaussianConjugatePrior = GaussianConjugatePrior()) -> PosteriorResult:
    """Full Bayesian posterior over change point positions.

    Aggregation over the unknown count: uniform prior on k in 1..k_max,
    re-weighted by the per-k evidence, summing the per-position marginals of
    all k change points. The result is deterministic for identical inputs.
    """
    y = _series_values(ts)
    n = y.shape[0]
    if k_max is None:
        k_max = min(30, max(1, n // 10))
    k_max = int(min(k_max, n - 1))
    if k_max < 1:
        raise ValueError("series too short for any change point")
    if n > 5000:
        raise ValueError("posterior tables need O(n^2) memory; downsample "
                         "(PAA) series longer than 5000 samples first")
    log_p = _log_marginal_table(y, hyper)
    log_pi = prior.log_pmf(np.arange(n + 2), n)
    base = _transition_matrix(log_p, log_pi)
    tails = _tail_arrays(base, log_p, k_max, epsilon)
    forward = _forward_arrays(base, k_max)
    log_evidence = tails[1: k_max + 1, 1]
    finite = np.isfinite(log_evidence)
    weights = np.zeros(k_max)
    if finite.any():
        weights[finite] = np.exp(log_evidence[finite]
                                 - logsumexp(log_evidence[finite]))
    cp_prob = np.zeros(n)
    positions = np.arange(1, n)
    for k in range(1, k_max + 1):
        if not finite[k - 1] or weights[k - 1] == 0.0:
            continue
        js = np.arange(1, k + 1)
        log_m = (forward[js][:, positions]
                 + tails[k - js][:, positions + 1] - log_evidence[k - 1])
        cp_prob[1:] += weights[k - 1] * np.exp(log_m).sum(axis=0)
    cp_prob = np.clip(cp_prob, 0.0, 1.0)
    result = PosteriorResult(log_p=log_p, log_q=tails, cp_prob=cp_prob,
                             k_max=k_max, epsilon=epsilon,
                             log_evidence=log_evidence, k_weights=weights,
                             _forward=forward)
    return result


def detect_peaks(cp_prob: np.ndarray, threshold: float = DEFAULT_THRESHOLD,
                 distance: int = DEFAULT_DISTANCE) -> ChangePointSet:
    """MAP-style extraction: probability peaks above a confidence threshold."""
    if not 0.0 <= threshold <= 1.0:
        raise ValueError("threshold must lie in [0, 1]")
    prob = np.asarray(cp_prob, dtype=float)
    idx = select_peaks(prob, threshold, distance)
    return ChangePointSet(tuple(int(i) for i in idx), prob.shape[0])


@dataclass(frozen=True)
class FusionResult:
    """Outcome of fusing the posterior curve with a user belief."""

    probs: np.ndarray
    degenerate: tuple[int, ...] = ()


def fuse_user_belief(cp_prob: np.ndarray, user_belief: Sequence[float]) -> FusionResult:
    """Log-odds fusion of the posterior with per-position user weights.

    ``u = 0.5`` carries no information (identity); ``u = 1`` (or 0) is
    absorbing certainty. Where the two are contradictory certainties the
    fused value is set to 0 and the index flagged (with a warning).
    """
    p = np.asarray(cp_prob, dtype=float)
    u = np.asarray(user_belief, dtype=float)
    if p.shape != u.shape:
        raise ValueError("posterior and belief must have equal length")
    if np.any((u < 0) | (u > 1)) or np.any((p < 0) | (p > 1)):
        raise ValueError("probabilities must lie in [0, 1]")
    agree = p * u
    disagree = (1.0 - p) * (1.0 - u)
    denom = agree + disagree
    bad = denom == 0.0
    out = np.zeros_like(p)
    np.divide(agree, denom, out=out, where=~bad)
    flagged = tuple(int(i) for i in np.nonzero(bad)[0])
    if flagged:
        warnings.warn(f"contradictory certainties at indices {flagged}; fused to 0",
                      DegenerateBeliefWarning, stacklevel=2)
    return FusionResult(out, flagged)


def map_paa_index(paa_positions, window: int) -> np.ndarray:
    """Original-resolution indices for boundaries of a PAA-downsampled series.

    Downsampled samples are anchored at window centres, so the boundary
    between consecutive downsampled samples ``tau - 1`` and ``tau`` maps to
    the shared window edge ``tau * window``.
    """
    pos = np.asarray(paa_positions, dtype=int)
    return pos * int(window)


def bayes_detect(ts, prior: DistancePrior = FLAT_PRIOR, k_max: int | None = None,
                 threshold: float = DEFAULT_THRESHOLD, distance: int = DEFAULT_DISTANCE,
                 paa_window: int = 1, epsilon: float = DEFAULT_EPSILON,
                 hyper: GaussianConjugatePrior = GaussianConjugatePrior()) -> ChangePointSet:
    """End-to-end Bayesian prediction: PAA, z-score, posterior, peaks.

    The series is z-scored after downsampling because the conjugate prior
    defaults are calibrated for unit-scale data. Detected positions are
    mapped back to the original resolution. A constant signal short-circuits
    to the empty prediction.
    """
    if isinstance(ts, TimeSeries):
        series = ts
    else:
        series = TimeSeries(np.asarray(ts, dtype=float))
    n0 = series.n
    if np.all(series.values == series.values[0]):
        return ChangePointSet((), n0)
    reduced = paa(series, paa_window) if paa_window > 1 else series
    reduced = normalise(reduced)
    posterior = cp_posterior(reduced, prior=prior, k_max=k_max,
                             epsilon=epsilon, hyper=hyper)
    peaks = detect_peaks(posterior.cp_prob, threshold, distance)
    mapped = map_paa_index(peaks.intermediate, paa_window)
    points = sorted({int(np.clip(i, 1, n0 - 1)) for i in mapped})
    return ChangePointSet(tuple(points), n0)


def write_cp_prob_csv(path: str | Path, cp_prob: np.ndarray,
                      indices: Sequence[int] | None = None) -> None:
    """Export the probability curve as ``index,probability`` rows."""
    prob = np.asarray(cp_prob, dtype=float)
    idx = np.arange(prob.shape[0]) if indices is None else np.asarray(indices)
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["index", "probability"])
        for i, value in zip(idx, prob):
            writer.writerow([int(i), repr(float(value))])
