"""Experiment orchestration: sweeps, aggregation, and report files.

The best sweep row is chosen lexicographically: highest F1, then lowest
meantime, then lowest annotation error, then highest precision. One rule,
deterministic, applied everywhere.
"""

from __future__ import annotations

import json
import time
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .bayes import DistancePrior, bayes_detect
from .costs import CostModel
from .errors import MismatchedLength
from .metrics import MetricsReport, evaluate, margin_from_fraction
from .peaks import select_peaks
from .search import SearchConfig, discrepancy_curve, pelt, win
from .series import ChangePointSet, SignalBundle, TimeSeries, load_csv, normalise
from .simulate import SimSpec, generate

SELECTION_RULE = "max F1, then min meantime, then min AE, then max precision"

DEFAULT_GAMMA_GRID = (0.1, 1.0, 10.0, 100.0, 1000.0, 10000.0)


def default_penalty_grid() -> np.ndarray:
    """{0} plus a 25-point log grid over 1e-3..1e5 plus the integers 1..50."""
    return np.unique(np.concatenate([
        [0.0], np.logspace(-3.0, 5.0, 25), np.arange(1.0, 51.0),
    ]))


@dataclass(frozen=True)
class SweepRow:
    param: float
    prediction: ChangePointSet
    report: MetricsReport


@dataclass(frozen=True)
class SweepResult:
    rows: tuple[SweepRow, ...]
    best_index: int
    selection_rule: str = SELECTION_RULE

    @property
    def best(self) -> SweepRow:
        return self.rows[self.best_index]

    def to_dict(self) -> dict:
        return {
            "selection_rule": self.selection_rule,
            "best_index": self.best_index,
            "rows": [
                {"param": row.param,
                 "change_points": list(row.prediction.intermediate),
                 "metrics": row.report.to_dict()}
                for row in self.rows
            ],
        }


def best_row_index(rows: Sequence[SweepRow]) -> int:
    """Pure selection over the rows; ties keep the earliest row."""
    if not rows:
        raise ValueError("cannot select from an empty sweep")
    best = 0
    best_key = None
    for i, row in enumerate(rows):
        r = row.report
        key = (r.f1, -r.meantime, -r.ae, r.precision)
        if best_key is None or key > best_key:
            best, best_key = i, key
    return best


def _detect(ts, model: CostModel, search_kind: str, penalty: float,
            half_width: int) -> ChangePointSet:
    cfg = SearchConfig(penalty=penalty, half_width=half_width)
    if search_kind == "pelt":
        return pelt(ts, model, cfg)[0]
    if search_kind == "win":
        return win(ts, model, cfg)
    raise ValueError(f"unknown search kind {search_kind!r}")


def penalty_sweep(ts, model: CostModel, search_kind: str,
                  truth: ChangePointSet, grid=None, margin: int | None = None,
                  dt: float = 1.0, half_width: int = 100) -> SweepResult:
    """One detection and evaluation per penalty value.

    For the window search the discrepancy curve is penalty-independent and is
    computed once, so the sweep only repeats the peak selection.
    """
    values = ts.values if isinstance(ts, TimeSeries) else np.asarray(ts, dtype=float)
    n = values.shape[0]
    grid = default_penalty_grid() if grid is None else np.asarray(list(grid), dtype=float)
    if grid.size == 0:
        raise ValueError("penalty grid must be nonempty")
    if margin is None:
        margin = margin_from_fraction(n)
    rows = []
    if search_kind == "win":
        curve = discrepancy_curve(values, model, half_width)
        for beta in grid:
            idx = select_peaks(curve, float(beta), half_width)
            cps = ChangePointSet(tuple(int(i) for i in idx), n)
            rows.append(SweepRow(float(beta), cps, evaluate(cps, truth, margin, dt)))
    else:
        for beta in grid:
            cps = _detect(values, model, search_kind, float(beta), half_width)
            rows.append(SweepRow(float(beta), cps, evaluate(cps, truth, margin, dt)))
    return SweepResult(tuple(rows), best_row_index(rows))


def gamma_sweep(ts, kind: str, truth: ChangePointSet,
                gammas=DEFAULT_GAMMA_GRID, penalty: float = 100.0,
                search_kind: str = "win", margin: int | None = None,
                dt: float = 1.0, half_width: int = 100, lags: int = 4) -> SweepResult:
    """Detection per regularisation weight at a fixed penalty."""
    if kind not in ("ridge", "lasso"):
        raise ValueError("gamma sweeps apply to ridge or lasso costs only")
    values = ts.values if isinstance(ts, TimeSeries) else np.asarray(ts, dtype=float)
    n = values.shape[0]
    if margin is None:
        margin = margin_from_fraction(n)
    rows = []
    for gamma in gammas:
        model = CostModel(kind, gamma=float(gamma), lags=lags)
        cps = _detect(values, model, search_kind, penalty, half_width)
        rows.append(SweepRow(float(gamma), cps, evaluate(cps, truth, margin, dt)))
    return SweepResult(tuple(rows), best_row_index(rows))


def aggregate_union(predictions: Sequence[ChangePointSet],
                    merge_radius: int) -> ChangePointSet:
    """Union of per-signal predictions with nearby points collapsed.

    Points are clustered by single linkage (consecutive gaps <= merge_radius
    chain together) and each cluster is replaced by its rounded mean.
    """
    if not predictions:
        raise ValueError("need at least one prediction")
    n = predictions[0].n
    if any(p.n != n for p in predictions):
        raise MismatchedLength("all predictions must refer to the same length")
    points = sorted(set(p for cps in predictions for p in cps.intermediate))
    if not points:
        return ChangePointSet((), n)
    merged: list[int] = []
    cluster = [points[0]]
    for p in points[1:]:
        if p - cluster[-1] <= merge_radius:
            cluster.append(p)
        else:
            merged.append(round(float(np.mean(cluster))))
            cluster = [p]
    merged.append(round(float(np.mean(cluster))))
    merged = [min(max(p, 1), n - 1) for p in merged]
    return ChangePointSet.from_points(merged, n)


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything a reproducible run needs.

    Either ``sim`` or ``csv_path`` (with columns) names the dataset. For
    multi-signal bundles, detection runs per signal and the union of the
    per-signal predictions (merge radius 1% of n) is reported.
    """

    method: str = "pelt"  # pelt | win | bayes
    sim: SimSpec | None = None
    csv_path: str | None = None
    time_column: str = "time"
    value_columns: tuple[str, ...] = ()
    truth: tuple[int, ...] | None = None
    cost: str = "l2"
    gamma: float = 1.0
    lags: int = 4
    penalty: float | None = None
    grid: tuple[float, ...] | None = None
    half_width: int = 100
    prior_kind: str = "flat"
    prior_p: float = 0.5
    prior_r: int = 1
    k_max: int | None = None
    threshold: float = 0.2
    distance: int = 10
    paa_window: int = 1
    epsilon: float = 1e-10
    margin_pct: float = 1.0
    normalise_signals: bool = False
    output_dir: str = "."

    def __post_init__(self):
        if self.method not in ("pelt", "win", "bayes"):
            raise ValueError(f"unknown method {self.method!r}")
        if self.method != "bayes" and self.penalty is None and self.grid is None:
            raise ValueError("pelt/win need a penalty or a penalty grid")
        if (self.sim is None) == (self.csv_path is None):
            raise ValueError("exactly one of sim or csv_path must be given")


def _load_bundle(cfg: ExperimentConfig) -> SignalBundle:
    if cfg.sim is not None:
        return generate(cfg.sim)
    bundle = load_csv(cfg.csv_path, cfg.time_column, list(cfg.value_columns))
    if cfg.truth is not None:
        bundle = SignalBundle(bundle.series,
                              truth=ChangePointSet.from_points(cfg.truth, bundle.n),
                              dropped_rows=bundle.dropped_rows)
    return bundle


def _predict_signal(ts: TimeSeries, cfg: ExperimentConfig,
                    truth: ChangePointSet | None, margin: int):
    """(prediction, sweep-or-None) for one signal."""
    series = normalise(ts) if cfg.normalise_signals else ts
    if cfg.method == "bayes":
        prior = DistancePrior(cfg.prior_kind, p=cfg.prior_p, r=cfg.prior_r)
        pred = bayes_detect(series, prior=prior, k_max=cfg.k_max,
                            threshold=cfg.threshold, distance=cfg.distance,
                            paa_window=cfg.paa_window, epsilon=cfg.epsilon)
        return pred, None
    model = CostModel(cfg.cost, gamma=cfg.gamma, lags=cfg.lags)
    if cfg.grid is not None:
        if truth is None:
            raise ValueError("a penalty sweep needs ground truth for scoring")
        sweep = penalty_sweep(series, model, cfg.method, truth, grid=cfg.grid,
                              margin=margin, dt=ts.dt, half_width=cfg.half_width)
        return sweep.best.prediction, sweep
    pred = _detect(series.values, model, cfg.method, float(cfg.penalty), cfg.half_width)
    return pred, None


def run_experiment(cfg: ExperimentConfig) -> dict:
    """Run a full experiment and write ``report.json`` plus ``detections.csv``.

    Deterministic given the config and seed; the report is byte-identical
    across runs except for its ``timestamp`` field.
    """
    bundle = _load_bundle(cfg)
    n = bundle.n
    margin = margin_from_fraction(n, cfg.margin_pct)
    predictions = []
    sweeps = []
    for ts in bundle.series:
        pred, sweep = _predict_signal(ts, cfg, bundle.truth, margin)
        predictions.append(pred)
        sweeps.append(sweep)
    union = aggregate_union(predictions, merge_radius=margin) \
        if len(predictions) > 1 else predictions[0]
    report: dict = {
        "config": _config_dict(cfg),
        "n": n,
        "margin": margin,
        "signals": [
            {
                "label": ts.label,
                "change_points": list(pred.intermediate),
                "sweep": sweep.to_dict() if sweep is not None else None,
            }
            for ts, pred, sweep in zip(bundle.series, predictions, sweeps)
        ],
        "union": list(union.intermediate),
        "timestamp": time.strftime("%Y-%m-%dT%H:%M:%S"),
    }
    if bundle.truth is not None:
        report["truth"] = list(bundle.truth.intermediate)
        report["metrics"] = evaluate(union, bundle.truth, margin,
                                     dt=bundle.dt).to_dict()
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "report.json").write_text(json.dumps(report, indent=2, sort_keys=True))
    with (out / "detections.csv").open("w", encoding="utf-8") as fh:
        fh.write("signal,change_point\n")
        for ts, pred in zip(bundle.series, predictions):
            for p in pred.intermediate:
                fh.write(f"{ts.label},{p}\n")
    return report


def _config_dict(cfg: ExperimentConfig) -> dict:
    data = asdict(cfg)
    if cfg.sim is not None:
        data["sim"] = asdict(cfg.sim)
    return data
