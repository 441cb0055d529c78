"""HTTP/JSON service: dataset registration, correlation, training jobs,
risk maps, and synchronous scenario evaluation.

Registered objects are immutable, so reads need no locking; a single lock
guards registration and the one-at-a-time training worker. Every error
response carries a machine-readable ``code`` plus a human ``message``.
"""

from __future__ import annotations

import itertools
import json
import queue
import threading
from dataclasses import dataclass, field
from datetime import date
from pathlib import Path
from typing import Any, Literal, Optional

from fastapi import FastAPI, Query, Request
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse, Response
from pydantic import BaseModel, Field

from . import correlation, grids, lstm, risk, series
from .errors import (
    AirriskError,
    AlignmentError,
    EmptyRegionError,
    EmptySeriesError,
    FormatError,
    InsufficientOverlapError,
    NoValidDelayError,
    TrainingDivergedError,
    UndefinedCorrelationError,
    UnknownSourceError,
)
from .schemas import SCENARIO_SCHEMA

DatasetKind = Literal["raster", "cases", "mask", "features", "targets", "model"]


class ServiceError(Exception):
    """Error with an HTTP status and a stable machine-readable code."""

    def __init__(self, status: int, code: str, message: str):
        super().__init__(message)
        self.status = status
        self.code = code
        self.message = message


def _not_found(what: str, name: str) -> ServiceError:
    return ServiceError(404, "unknown_handle", f"no {what} registered under {name!r}")


@dataclass
class ModelEntry:
    model: lstm.LstmModel
    baseline: str | None = None  # features handle used for default predictions
    grid: risk.GridSpec | None = None
    _predictions: lstm.TargetMatrix | None = None


@dataclass
class JobRecord:
    job_id: str
    kind: str = "train"
    status: str = "queued"  # queued -> running -> done | failed
    progress: int = 0
    total_epochs: int = 0
    result_ref: str | None = None

    def to_dict(self) -> dict:
        return {
            "job_id": self.job_id,
            "kind": self.kind,
            "status": self.status,
            "progress": self.progress,
            "total_epochs": self.total_epochs,
            "result_ref": self.result_ref,
        }


class Registry:
    """Named handles to immutable datasets and models; single-writer."""

    def __init__(self) -> None:
        self._lock = threading.Lock()
        self._entries: dict[str, tuple[str, Any]] = {}

    def register(self, name: str, kind: str, obj: Any) -> None:
        with self._lock:
            if name in self._entries:
                raise ServiceError(409, "duplicate_handle", f"handle {name!r} already registered")
            self._entries[name] = (kind, obj)

    def get(self, name: str, kind: str) -> Any:
        entry = self._entries.get(name)
        if entry is None or entry[0] != kind:
            raise _not_found(kind, name)
        return entry[1]

    def names(self, kind: str) -> list[str]:
        return sorted(n for n, (k, _) in self._entries.items() if k == kind)

    def describe(self) -> list[dict]:
        return [{"name": n, "kind": k} for n, (k, _) in sorted(self._entries.items())]


class TrainWorker:
    """Dedicated thread running at most one training job, queue depth 1."""

    def __init__(self, app_state: "AppState") -> None:
        self.state = app_state
        self.queue: queue.Queue = queue.Queue(maxsize=1)
        self._running = threading.Event()
        self.thread = threading.Thread(target=self._loop, daemon=True)
        self.thread.start()

    def submit(self, job: JobRecord, work: dict) -> None:
        try:
            self.queue.put_nowait((job, work))
        except queue.Full:
            raise ServiceError(409, "queue_full", "a training job is already queued; retry later")

    def _loop(self) -> None:
        while True:
            job, work = self.queue.get()
            self._running.set()
            job.status = "running"
            try:
                self._train(job, work)
                job.status = "done"
            except AirriskError as exc:
                job.result_ref = f"{type(exc).__name__}: {exc}"
                job.status = "failed"
            except Exception as exc:  # defensive: never kill the worker
                job.result_ref = f"internal error: {exc}"
                job.status = "failed"
            finally:
                self._running.clear()
                self.queue.task_done()

    def _train(self, job: JobRecord, work: dict) -> None:
        def on_epoch(epoch: int, _loss: float) -> None:
            job.progress = epoch + 1

        model = lstm.init_model(
            n_in=work["features"].n_sources,
            n_hidden=work["n_hidden"],
            n_out=work["targets"].p_dims,
            seed=work["cfg"].seed,
        )
        trained, record = lstm.train(model, [(work["features"], work["targets"])],
                                     work["cfg"], on_epoch=on_epoch)
        name = work["name"]
        entry = ModelEntry(model=trained, baseline=work["baseline"], grid=work["grid"])
        self.state.registry.register(name, "model", entry)
        self.state.persist_model(name, trained, record)
        job.result_ref = name


@dataclass
class AppState:
    data_dir: Path | None = None
    thresholds: risk.RiskThresholds = field(default_factory=risk.RiskThresholds)
    registry: Registry = field(default_factory=Registry)
    jobs: dict[str, JobRecord] = field(default_factory=dict)
    _job_counter: "itertools.count[int]" = field(default_factory=lambda: itertools.count(1))
    _job_lock: threading.Lock = field(default_factory=threading.Lock)

    def new_job(self) -> JobRecord:
        with self._job_lock:
            job = JobRecord(job_id=f"job-{next(self._job_counter)}")
            self.jobs[job.job_id] = job
            return job

    def persist_model(self, name: str, model: lstm.LstmModel, record: lstm.TrainRecord) -> None:
        if self.data_dir is None:
            return
        models_dir = self.data_dir / "models"
        models_dir.mkdir(parents=True, exist_ok=True)
        lstm.save_model(model, models_dir / f"{name}.json")
        record.write_csv(models_dir / f"{name}.loss.csv")

    def persist_report(self, stem: str, report: correlation.LagCorrelationReport) -> None:
        if self.data_dir is None:
            return
        reports_dir = self.data_dir / "reports"
        reports_dir.mkdir(parents=True, exist_ok=True)
        correlation.write_report(report, reports_dir / f"{stem}.json")


# --- request bodies -------------------------------------------------------

class GridIn(BaseModel):
    rows: int
    cols: int
    bbox: dict[str, float]
    resolution: Literal["macro", "micro"] = "macro"
    start_date: str = "2020-01-01"
    step_days: int = 5

    def to_spec(self) -> risk.GridSpec:
        return risk.GridSpec(
            rows=self.rows,
            cols=self.cols,
            bbox=grids.BBox.from_dict(self.bbox),
            resolution=self.resolution,
            start_date=date.fromisoformat(self.start_date),
            step_days=self.step_days,
        )


class DatasetIn(BaseModel):
    name: str = Field(min_length=1)
    kind: DatasetKind
    path: Optional[str] = None
    payload: Optional[Any] = None
    baseline: Optional[str] = None  # model kind: features handle to bind
    grid: Optional[GridIn] = None


class TrainConfigIn(BaseModel):
    learning_rate: float = 0.05
    epochs: int = 200
    gradient_clip: Optional[float] = None
    seed: int = 0


class TrainIn(BaseModel):
    features: str
    targets: str
    name: Optional[str] = None
    n_hidden: int = 8
    config: TrainConfigIn = Field(default_factory=TrainConfigIn)
    grid: Optional[GridIn] = None


class ScenarioIn(BaseModel):
    model: str
    scenario: dict
    features: Optional[str] = None  # overrides the model's bound baseline
    grid: Optional[GridIn] = None
    thresholds: Optional[dict[str, float]] = None


# --- loaders --------------------------------------------------------------

def _load_dataset(body: DatasetIn, state: AppState) -> Any:
    doc = body.payload
    if body.path is not None and doc is not None:
        raise ServiceError(400, "bad_request", "provide either 'path' or 'payload', not both")
    if body.kind == "cases":
        if body.path is not None:
            return series.load_case_series(body.path)
        if not isinstance(doc, list):
            raise ServiceError(400, "bad_request", "cases payload must be a list of [date, count] rows")
        try:
            points = [(date.fromisoformat(str(d)), float(v)) for d, v in doc]
        except (TypeError, ValueError) as exc:
            raise FormatError(f"malformed cases payload: {exc}") from exc
        points.sort(key=lambda p: p[0])
        return series.ScalarSeries(
            dates=tuple(p[0] for p in points),
            values=tuple(p[1] for p in points),
            kind="new_cases",
        )
    if body.path is not None:
        try:
            doc = json.loads(Path(body.path).read_text())
        except OSError as exc:
            raise FormatError(f"cannot read {body.path}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise FormatError(f"{body.path}: invalid JSON at line {exc.lineno}: {exc.msg}") from exc
    if doc is None:
        raise ServiceError(400, "bad_request", "provide 'path' or 'payload'")
    if body.kind == "raster":
        return grids.grid_series_from_dict(doc)
    if body.kind == "mask":
        return grids.region_mask_from_dict(doc)
    if body.kind == "features":
        return lstm.feature_matrix_from_dict(doc)
    if body.kind == "targets":
        return lstm.target_matrix_from_dict(doc)
    if body.kind == "model":
        model = lstm.model_from_dict(doc)
        grid = body.grid.to_spec() if body.grid is not None else None
        return ModelEntry(model=model, baseline=body.baseline, grid=grid)
    raise ServiceError(400, "bad_request", f"unknown dataset kind {body.kind!r}")


def _default_grid(model: lstm.LstmModel) -> risk.GridSpec:
    # degenerate 1 x n_out strip when the caller never bound a geometry
    return risk.GridSpec(
        rows=1,
        cols=model.n_out,
        bbox=grids.BBox(lat_min=0.0, lat_max=1.0, lon_min=0.0, lon_max=float(model.n_out)),
        resolution="macro",
    )


def _baseline_prediction(entry: ModelEntry, state: AppState) -> lstm.TargetMatrix:
    if entry._predictions is None:
        if entry.baseline is None:
            raise ServiceError(
                422, "no_baseline",
                "model has no bound baseline features; register it with 'baseline'",
            )
        features = state.registry.get(entry.baseline, "features")
        entry._predictions = lstm.predict(entry.model, features)
    return entry._predictions


# --- app ------------------------------------------------------------------

def create_app(data_dir: str | Path | None = None,
               thresholds: risk.RiskThresholds | None = None) -> FastAPI:
    state = AppState(
        data_dir=Path(data_dir) if data_dir is not None else None,
        thresholds=thresholds or risk.RiskThresholds(),
    )
    app = FastAPI(title="airrisk service", version="1")
    app.state.airrisk = state
    worker = TrainWorker(state)
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"],
    )

    @app.exception_handler(ServiceError)
    async def _service_error(_req: Request, exc: ServiceError) -> JSONResponse:
        return JSONResponse(status_code=exc.status,
                            content={"code": exc.code, "message": exc.message})

    @app.exception_handler(AirriskError)
    async def _domain_error(_req: Request, exc: AirriskError) -> JSONResponse:
        unprocessable = (
            NoValidDelayError, UndefinedCorrelationError, UnknownSourceError,
            AlignmentError, InsufficientOverlapError, EmptyRegionError,
            EmptySeriesError, TrainingDivergedError,
        )
        status = 422 if isinstance(exc, unprocessable) else 400
        code = {
            NoValidDelayError: "no_valid_delay",
            UndefinedCorrelationError: "undefined_correlation",
            UnknownSourceError: "unknown_source",
            FormatError: "format_error",
        }.get(type(exc), "invalid_input")
        return JSONResponse(status_code=status, content={"code": code, "message": str(exc)})

    @app.exception_handler(RequestValidationError)
    async def _request_error(_req: Request, exc: RequestValidationError) -> JSONResponse:
        return JSONResponse(status_code=422,
                            content={"code": "invalid_request", "message": str(exc.errors())})

    @app.get("/health")
    def health() -> dict:
        return {"status": "ok"}

    @app.get("/config")
    def config() -> dict:
        return {
            "thresholds": state.thresholds.to_dict(),
            "defaults": {"window_days": 5, "max_delay": 15, "min_overlap": 3},
        }

    @app.get("/schemas/scenario")
    def scenario_schema() -> dict:
        return SCENARIO_SCHEMA

    @app.post("/datasets", status_code=201)
    def register_dataset(body: DatasetIn) -> dict:
        obj = _load_dataset(body, state)
        state.registry.register(body.name, body.kind, obj)
        return {"name": body.name, "kind": body.kind}

    @app.get("/datasets")
    def list_datasets() -> list[dict]:
        return state.registry.describe()

    @app.get("/models")
    def list_models() -> list[dict]:
        out = []
        for name in state.registry.names("model"):
            entry = state.registry.get(name, "model")
            grid = entry.grid or _default_grid(entry.model)
            sources = None
            n_steps = None
            if entry.baseline is not None:
                features = state.registry.get(entry.baseline, "features")
                sources = list(features.source_labels)
                n_steps = features.n_steps
            out.append({
                "name": name,
                "n_in": entry.model.n_in,
                "n_hidden": entry.model.n_hidden,
                "n_out": entry.model.n_out,
                "baseline": entry.baseline,
                "sources": sources,
                "n_steps": n_steps,
                "grid": {"rows": grid.rows, "cols": grid.cols,
                         "resolution": grid.resolution},
            })
        return out

    @app.get("/correlation")
    def correlation_report(
        pollutant: str,
        cases: str,
        region: Optional[str] = None,
        max_delay: int = Query(default=15, ge=0),
        window: int = Query(default=5, ge=1),
        min_overlap: int = Query(default=3, ge=2),
        start: Optional[str] = None,
        interpolate: Literal["none", "linear"] = "none",
    ) -> dict:
        """Delay-sweep report for a pollutant handle vs a case-series handle."""
        entry = state.registry._entries.get(pollutant)
        if entry is None:
            raise _not_found("pollutant dataset", pollutant)
        kind, obj = entry
        region_name = "region"
        if kind == "raster":
            if region is None:
                raise ServiceError(400, "bad_request",
                                   "raster pollutant needs a 'region' mask handle")
            mask = state.registry.get(region, "mask")
            pollutant_series = grids.grid_series_to_regional_series(obj, mask)
            region_name = mask.name
        elif kind == "cases" or kind == "series":
            pollutant_series = obj
        else:
            raise _not_found("pollutant dataset", pollutant)
        case_series = state.registry.get(cases, "cases")

        anchor = date.fromisoformat(start) if start else min(
            pollutant_series.dates[0], case_series.dates[0]
        )
        pol_buckets = series.bucket_mean(pollutant_series, window, anchor)
        case_buckets = series.bucket_mean(case_series, window, anchor)
        if interpolate == "linear":
            pol_buckets = series.interpolate_gaps(pol_buckets)
            case_buckets = series.interpolate_gaps(case_buckets)
        pair = series.align(pol_buckets, case_buckets)
        report = correlation.lag_sweep(pair, max_delay, min_overlap, region_name=region_name)
        state.persist_report(f"{pollutant}__{cases}__d{max_delay}", report)
        return report.to_dict()

    @app.post("/train", status_code=202)
    def submit_train(body: TrainIn) -> dict:
        features = state.registry.get(body.features, "features")
        targets = state.registry.get(body.targets, "targets")
        if targets.q_steps != features.n_steps:
            raise ServiceError(
                422, "dimension_mismatch",
                f"targets have {targets.q_steps} steps, features {features.n_steps}",
            )
        cfg = lstm.TrainConfig(
            learning_rate=body.config.learning_rate,
            epochs=body.config.epochs,
            gradient_clip=body.config.gradient_clip,
            seed=body.config.seed,
        )
        job = state.new_job()
        job.total_epochs = cfg.epochs
        name = body.name or f"model-{job.job_id}"
        if name in {n for n in state.registry.names("model")}:
            raise ServiceError(409, "duplicate_handle", f"model {name!r} already exists")
        work = {
            "features": features, "targets": targets, "cfg": cfg,
            "n_hidden": body.n_hidden, "name": name, "baseline": body.features,
            "grid": body.grid.to_spec() if body.grid is not None else None,
        }
        try:
            worker.submit(job, work)
        except ServiceError:
            del state.jobs[job.job_id]
            raise
        return {"job_id": job.job_id}

    @app.get("/jobs/{job_id}")
    def job_status(job_id: str) -> dict:
        job = state.jobs.get(job_id)
        if job is None:
            raise _not_found("job", job_id)
        return job.to_dict()

    @app.post("/scenarios")
    def evaluate(body: ScenarioIn) -> dict:
        """Synchronous what-if evaluation against a registered model."""
        entry = state.registry.get(body.model, "model")
        baseline_handle = body.features or entry.baseline
        if baseline_handle is None:
            raise ServiceError(422, "no_baseline",
                               "no baseline features bound to the model or given in the request")
        baseline = state.registry.get(baseline_handle, "features")
        scenario = risk.scenario_from_dict(baseline, body.scenario)
        grid = body.grid.to_spec() if body.grid is not None else (entry.grid or _default_grid(entry.model))
        thresholds = state.thresholds
        if body.thresholds is not None:
            thresholds = risk.RiskThresholds(**body.thresholds)
        maps, summary = risk.evaluate_scenario(entry.model, scenario, grid, thresholds)
        return {
            "model": body.model,
            "description": scenario.description,
            "summary": summary,
            "thresholds": thresholds.to_dict(),
            "maps": [risk.risk_map_to_dict(m) for m in maps],
        }

    @app.get("/riskmaps/{model}/{t}")
    def riskmap(model: str, t: int, format: Literal["json", "pgm"] = "json") -> Response:
        """Baseline risk map for one timestep, as JSON or plain PGM bytes."""
        entry = state.registry.get(model, "model")
        prediction = _baseline_prediction(entry, state)
        grid = entry.grid or _default_grid(entry.model)
        if not 0 <= t < prediction.q_steps:
            raise ServiceError(404, "timestep_out_of_range",
                               f"t={t} outside 0..{prediction.q_steps - 1}")
        maps = risk.risk_maps_from_prediction(prediction, grid, state.thresholds)
        payload = risk.export_risk_map(maps[t], format)
        media = "application/json" if format == "json" else "image/x-portable-graymap"
        return Response(content=payload, media_type=media)

    return app
