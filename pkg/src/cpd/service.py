"""HTTP JSON API for interactive steering of detections.

Datasets live in an in-memory registry for the lifetime of the process. Each
dataset carries the latest posterior curve (possibly fused with user beliefs)
and the current prediction, which annotation edits mutate. Every response
that changes the prediction carries a monotonically increasing ``revision``
so clients can tie displayed metrics to the prediction they belong to.

Error mapping: 400 for malformed requests, 404 for unknown datasets,
422 for detection errors (too short, degenerate, and friends).
"""

from __future__ import annotations

import io
import itertools
import os
import threading
from dataclasses import dataclass, field as dataclass_field

import numpy as np
from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from .bayes import (
    DistancePrior,
    cp_posterior,
    fuse_user_belief,
    map_paa_index,
)
from .costs import CostModel
from .errors import CpdError
from .harness import SweepResult, aggregate_union, penalty_sweep
from .metrics import evaluate, margin_from_fraction
from .search import SearchConfig, pelt, win
from .series import (
    ChangePointSet,
    SignalBundle,
    TimeSeries,
    normalise,
    paa,
    read_csv_stream,
)
from .simulate import SimSpec, generate


class SimSpecModel(BaseModel):
    family: str
    n: int = 1400
    segments: int | None = None
    seed: int = 0
    noise: float | None = None


class DatasetRequest(BaseModel):
    sim: SimSpecModel | None = None
    csv_text: str | None = None
    time_column: str = "time"
    value_columns: list[str] | None = None
    truth: list[int] | None = None


class DetectRequest(BaseModel):
    dataset: str
    method: str = "pelt"
    cost: str = "l2"
    penalty: float = 10.0
    gamma: float = 1.0
    lags: int = 4
    half_width: int = 100
    signal: int | None = None
    margin_pct: float = 1.0
    normalise: bool = False


class PosteriorRequest(BaseModel):
    dataset: str
    prior: str = "flat"
    prior_p: float = 0.5
    prior_r: int = 1
    k_max: int | None = None
    paa_window: int = 1
    epsilon: float = 1e-10
    signal: int = 0


class PeaksRequest(BaseModel):
    dataset: str
    threshold: float = Field(0.2, ge=0.0, le=1.0)
    distance: int = Field(10, ge=1)
    margin_pct: float = 1.0


class FuseRequest(BaseModel):
    dataset: str
    user_belief: list[float]


class AnnotationRequest(BaseModel):
    dataset: str
    action: str
    index: int
    margin_pct: float = 1.0


@dataclass
class PosteriorState:
    cp_prob: np.ndarray
    window: int
    signal: int


@dataclass
class DatasetEntry:
    bundle: SignalBundle
    posterior: PosteriorState | None = None
    prediction: ChangePointSet | None = None
    revision: int = 0
    sweeps: dict = dataclass_field(default_factory=dict)


class Registry:
    """Thread-safe in-memory dataset store."""

    def __init__(self):
        self._lock = threading.Lock()
        self._entries: dict[str, DatasetEntry] = {}
        self._ids = itertools.count(1)

    def add(self, bundle: SignalBundle) -> str:
        with self._lock:
            dataset_id = f"ds-{next(self._ids)}"
            self._entries[dataset_id] = DatasetEntry(bundle)
            return dataset_id

    def get(self, dataset_id: str) -> DatasetEntry:
        entry = self._entries.get(dataset_id)
        if entry is None:
            raise KeyError(dataset_id)
        return entry

    def bump(self, entry: DatasetEntry, prediction: ChangePointSet) -> int:
        with self._lock:
            entry.prediction = prediction
            entry.revision += 1
            return entry.revision


def _metrics_or_none(entry: DatasetEntry, prediction: ChangePointSet,
                     margin_pct: float):
    truth = entry.bundle.truth
    if truth is None:
        return None
    margin = margin_from_fraction(entry.bundle.n, margin_pct)
    return evaluate(prediction, truth, margin, dt=entry.bundle.dt).to_dict()


def create_app(registry: Registry | None = None) -> FastAPI:
    app = FastAPI(title="cpd", version="0.1.0")
    app.add_middleware(CORSMiddleware, allow_origins=["*"],
                       allow_methods=["*"], allow_headers=["*"])
    reg = registry or Registry()
    app.state.registry = reg

    @app.exception_handler(RequestValidationError)
    async def bad_request(request: Request, exc: RequestValidationError):
        return JSONResponse(status_code=400, content={"detail": exc.errors()})

    @app.exception_handler(KeyError)
    async def unknown_dataset(request: Request, exc: KeyError):
        return JSONResponse(status_code=404,
                            content={"detail": f"unknown dataset {exc.args[0]!r}"})

    @app.exception_handler(CpdError)
    async def detection_error(request: Request, exc: CpdError):
        return JSONResponse(status_code=422, content={"detail": str(exc)})

    @app.exception_handler(ValueError)
    async def invalid_value(request: Request, exc: ValueError):
        return JSONResponse(status_code=422, content={"detail": str(exc)})

    @app.post("/datasets")
    def register_dataset(req: DatasetRequest):
        if (req.sim is None) == (req.csv_text is None):
            return JSONResponse(status_code=400, content={
                "detail": "provide exactly one of sim or csv_text"})
        if req.sim is not None:
            bundle = generate(SimSpec(**req.sim.model_dump()))
        else:
            if not req.value_columns:
                return JSONResponse(status_code=400, content={
                    "detail": "value_columns required with csv_text"})
            bundle = read_csv_stream(io.StringIO(req.csv_text), req.time_column,
                                     req.value_columns, name="<upload>")
        if req.truth is not None:
            bundle = SignalBundle(bundle.series,
                                  truth=ChangePointSet.from_points(req.truth, bundle.n),
                                  dropped_rows=bundle.dropped_rows)
        dataset_id = reg.add(bundle)
        return {"id": dataset_id, "n": bundle.n, "dt": bundle.dt,
                "labels": [ts.label for ts in bundle.series],
                "truth": list(bundle.truth.intermediate) if bundle.truth else None,
                "dropped_rows": bundle.dropped_rows}

    @app.get("/datasets/{dataset_id}")
    def get_dataset(dataset_id: str):
        entry = reg.get(dataset_id)
        bundle = entry.bundle
        return {"id": dataset_id, "n": bundle.n, "dt": bundle.dt,
                "series": [{"label": ts.label, "t0": ts.t0,
                            "values": ts.values.tolist()}
                           for ts in bundle.series],
                "truth": list(bundle.truth.intermediate) if bundle.truth else None}

    @app.post("/detect")
    def detect(req: DetectRequest):
        entry = reg.get(req.dataset)
        bundle = entry.bundle
        model = CostModel(req.cost, gamma=req.gamma, lags=req.lags)
        cfg = SearchConfig(penalty=req.penalty, half_width=req.half_width)
        indices = (range(len(bundle.series)) if req.signal is None
                   else [req.signal])
        per_signal = []
        predictions = []
        for idx in indices:
            ts = bundle.series[idx]
            if req.normalise:
                ts = normalise(ts)
            if req.method == "pelt":
                cps, _ = pelt(ts.values, model, cfg)
            elif req.method == "win":
                cps = win(ts.values, model, cfg)
            else:
                return JSONResponse(status_code=400, content={
                    "detail": f"unknown method {req.method!r}"})
            predictions.append(cps)
            per_signal.append({"signal": idx, "label": bundle.series[idx].label,
                               "change_points": list(cps.intermediate)})
        merged = (aggregate_union(predictions, margin_from_fraction(bundle.n))
                  if len(predictions) > 1 else predictions[0])
        revision = reg.bump(entry, merged)
        return {"dataset": req.dataset, "revision": revision,
                "change_points": list(merged.intermediate),
                "per_signal": per_signal,
                "metrics": _metrics_or_none(entry, merged, req.margin_pct)}

    @app.post("/bayes/posterior")
    def posterior(req: PosteriorRequest):
        entry = reg.get(req.dataset)
        bundle = entry.bundle
        if not 0 <= req.signal < len(bundle.series):
            return JSONResponse(status_code=400, content={
                "detail": f"signal index {req.signal} out of range"})
        series = bundle.series[req.signal]
        reduced = paa(series, req.paa_window) if req.paa_window > 1 else series
        reduced = normalise(reduced)
        prior = DistancePrior(req.prior, p=req.prior_p, r=req.prior_r)
        result = cp_posterior(reduced, prior=prior, k_max=req.k_max,
                              epsilon=req.epsilon)
        entry.posterior = PosteriorState(result.cp_prob, req.paa_window, req.signal)
        positions = map_paa_index(np.arange(result.n), req.paa_window)
        return {"dataset": req.dataset,
                "positions": positions.tolist(),
                "cp_prob": result.cp_prob.tolist(),
                "k_max": result.k_max,
                "log_evidence": result.log_evidence.tolist()}

    @app.post("/bayes/peaks")
    def peaks(req: PeaksRequest):
        entry = reg.get(req.dataset)
        state = entry.posterior
        if state is None:
            return JSONResponse(status_code=422, content={
                "detail": "compute /bayes/posterior first"})
        from .bayes import detect_peaks  # local import avoids cycle at startup

        n0 = entry.bundle.n
        found = detect_peaks(state.cp_prob, req.threshold, req.distance)
        mapped = map_paa_index(found.intermediate, state.window)
        points = sorted({int(np.clip(i, 1, n0 - 1)) for i in mapped})
        prediction = ChangePointSet(tuple(points), n0)
        revision = reg.bump(entry, prediction)
        return {"dataset": req.dataset, "revision": revision,
                "change_points": points,
                "metrics": _metrics_or_none(entry, prediction, req.margin_pct)}

    @app.post("/posterior/fuse")
    def fuse(req: FuseRequest):
        entry = reg.get(req.dataset)
        state = entry.posterior
        if state is None:
            return JSONResponse(status_code=422, content={
                "detail": "compute /bayes/posterior first"})
        belief = np.asarray(req.user_belief, dtype=float)
        n_curve = state.cp_prob.shape[0]
        if belief.shape[0] == entry.bundle.n and state.window > 1:
            series = TimeSeries(belief) if belief.shape[0] >= 2 else None
            belief = paa(series, state.window).values
            belief = np.clip(belief, 0.0, 1.0)
        if belief.shape[0] != n_curve:
            return JSONResponse(status_code=400, content={
                "detail": f"belief length {belief.shape[0]} != curve length {n_curve}"})
        fused = fuse_user_belief(state.cp_prob, belief)
        state.cp_prob = fused.probs
        positions = map_paa_index(np.arange(n_curve), state.window)
        return {"dataset": req.dataset,
                "positions": positions.tolist(),
                "cp_prob": fused.probs.tolist(),
                "degenerate": list(fused.degenerate)}

    @app.post("/annotations")
    def annotate(req: AnnotationRequest):
        entry = reg.get(req.dataset)
        n = entry.bundle.n
        current = entry.prediction or ChangePointSet((), n)
        if req.action == "add":
            prediction = current.add(req.index)
        elif req.action == "remove":
            prediction = current.remove(req.index)
        else:
            return JSONResponse(status_code=400, content={
                "detail": "action must be add or remove"})
        revision = reg.bump(entry, prediction)
        return {"dataset": req.dataset, "revision": revision,
                "change_points": list(prediction.intermediate),
                "metrics": _metrics_or_none(entry, prediction, req.margin_pct)}

    @app.get("/sweep/{dataset_id}")
    def sweep(dataset_id: str, method: str = "pelt", cost: str = "l2",
              gamma: float = 1.0, lags: int = 4, half_width: int = 100,
              signal: int = 0, margin_pct: float = 1.0):
        entry = reg.get(dataset_id)
        bundle = entry.bundle
        if bundle.truth is None:
            return JSONResponse(status_code=422, content={
                "detail": "sweeps need ground truth for scoring"})
        key = (method, cost, gamma, lags, half_width, signal, margin_pct)
        result: SweepResult | None = entry.sweeps.get(key)
        if result is None:
            model = CostModel(cost, gamma=gamma, lags=lags)
            margin = margin_from_fraction(bundle.n, margin_pct)
            result = penalty_sweep(bundle.series[signal], model, method,
                                   bundle.truth, margin=margin,
                                   dt=bundle.dt, half_width=half_width)
            entry.sweeps[key] = result
        return {"dataset": dataset_id, **result.to_dict()}

    return app


def serve(host: str = "127.0.0.1", port: int = 8000) -> None:
    """Run the service; the ``CPD_PORT`` env var overrides the port."""
    import uvicorn

    port = int(os.environ.get("CPD_PORT", port))
    uvicorn.run(create_app(), host=host, port=port)
