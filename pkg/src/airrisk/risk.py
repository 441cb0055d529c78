"""Risk maps and what-if scenarios on top of model predictions.

Raw model outputs are squashed to [0, 1] with a logistic map and discretized
into low/medium/high levels; scenarios perturb a baseline feature matrix and
re-run prediction so trajectories can be compared against the baseline.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from datetime import date, timedelta
from typing import Literal, Mapping, Sequence

import numpy as np

from .errors import (
    DimensionError,
    FormatError,
    ShapeMismatchError,
    UnknownSourceError,
    ValidationError,
)
from .grids import BBox
from .lstm import FeatureMatrix, LstmModel, TargetMatrix, predict

RISKMAP_FORMAT_VERSION = 1
Resolution = Literal["macro", "micro"]
LEVELS = ("low", "medium", "high")


@dataclass(frozen=True)
class RiskThresholds:
    """Level boundaries; a risk exactly on a boundary takes the lower level."""

    low_upper: float = 0.33
    medium_upper: float = 0.66

    def __post_init__(self) -> None:
        if not 0.0 < self.low_upper < self.medium_upper < 1.0:
            raise ValidationError(
                f"thresholds must satisfy 0 < low_upper < medium_upper < 1, "
                f"got ({self.low_upper}, {self.medium_upper})"
            )

    def level(self, risk: float) -> str:
        if risk <= self.low_upper:
            return "low"
        if risk <= self.medium_upper:
            return "medium"
        return "high"

    def to_dict(self) -> dict:
        return {"low_upper": self.low_upper, "medium_upper": self.medium_upper}


@dataclass(frozen=True)
class GridSpec:
    """Geometry and cadence shared by every map in one prediction run."""

    rows: int
    cols: int
    bbox: BBox
    resolution: Resolution = "macro"
    start_date: date = date(2020, 1, 1)
    step_days: int = 5

    def __post_init__(self) -> None:
        if self.rows < 1 or self.cols < 1:
            raise ValidationError(f"grid spec needs positive shape, got {self.rows}x{self.cols}")
        if self.resolution not in ("macro", "micro"):
            raise ValidationError(f"unknown resolution tag {self.resolution!r}")
        if self.step_days < 1:
            raise ValidationError(f"step_days must be >= 1, got {self.step_days}")

    @property
    def n_cells(self) -> int:
        return self.rows * self.cols

    def timestamp(self, step: int) -> date:
        return self.start_date + timedelta(days=step * self.step_days)


@dataclass(frozen=True)
class RiskMap:
    """One gridded risk field in [0, 1] with discrete levels."""

    timestamp: date
    rows: int
    cols: int
    bbox: BBox
    resolution: Resolution
    risk: np.ndarray
    levels: tuple[str, ...]
    thresholds: RiskThresholds

    def __post_init__(self) -> None:
        risk = np.asarray(self.risk, dtype=np.float64)
        if risk.shape != (self.rows, self.cols):
            raise ShapeMismatchError(f"risk shape {risk.shape} does not match {self.rows}x{self.cols}")
        if not np.all((risk >= 0.0) & (risk <= 1.0)):
            raise ValidationError("risk values must lie in [0, 1]")
        if len(self.levels) != risk.size:
            raise ValidationError(f"{len(self.levels)} levels for {risk.size} cells")
        for value, level in zip(risk.reshape(-1), self.levels):
            if level != self.thresholds.level(float(value)):
                raise ValidationError(f"level {level!r} inconsistent with thresholds at risk {value}")
        object.__setattr__(self, "risk", risk)

    @property
    def mean_risk(self) -> float:
        return float(self.risk.mean())


def squash_to_risk(raw: TargetMatrix | np.ndarray) -> np.ndarray:
    """Elementwise logistic map 1/(1+exp(-v)); strictly monotone into (0, 1)."""
    v = raw.data if isinstance(raw, TargetMatrix) else np.asarray(raw, dtype=np.float64)
    if not np.all(np.isfinite(v)):
        raise ValidationError("cannot squash non-finite values")
    out = np.empty_like(v, dtype=np.float64)
    pos = v >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-v[pos]))
    ev = np.exp(v[~pos])
    out[~pos] = ev / (1.0 + ev)
    return out


def assemble_risk_maps(
    per_cell_predictions: Mapping[int, TargetMatrix],
    grid_spec: GridSpec,
    thresholds: RiskThresholds,
) -> list[RiskMap]:
    """Merge per-cell prediction rows into one RiskMap per timestep.

    Every cell index 0..n_cells-1 must be present with a single output row;
    all cells must agree on the number of steps.
    """
    n = grid_spec.n_cells
    missing = [cell for cell in range(n) if cell not in per_cell_predictions]
    if missing:
        raise ValidationError(f"missing predictions for cells {missing[:8]} (n={len(missing)})")
    q = None
    raw = np.empty((n, 0))
    for cell in range(n):
        pred = per_cell_predictions[cell]
        if pred.p_dims != 1:
            raise DimensionError(f"cell {cell} prediction has {pred.p_dims} rows, expected 1")
        if q is None:
            q = pred.q_steps
            raw = np.empty((n, q))
        elif pred.q_steps != q:
            raise DimensionError(f"cell {cell} has {pred.q_steps} steps, others have {q}")
        raw[cell, :] = pred.data[0]

    risk = squash_to_risk(raw)
    maps: list[RiskMap] = []
    for t in range(q or 0):
        field = risk[:, t].reshape(grid_spec.rows, grid_spec.cols)
        levels = tuple(thresholds.level(float(v)) for v in field.reshape(-1))
        maps.append(RiskMap(
            timestamp=grid_spec.timestamp(t),
            rows=grid_spec.rows,
            cols=grid_spec.cols,
            bbox=grid_spec.bbox,
            resolution=grid_spec.resolution,
            risk=field,
            levels=levels,
            thresholds=thresholds,
        ))
    return maps


def risk_maps_from_prediction(
    y: TargetMatrix, grid_spec: GridSpec, thresholds: RiskThresholds
) -> list[RiskMap]:
    """Treat output row i as grid cell i and assemble the map series."""
    if y.p_dims != grid_spec.n_cells:
        raise DimensionError(
            f"prediction has {y.p_dims} rows, grid needs {grid_spec.n_cells} cells"
        )
    per_cell = {cell: TargetMatrix(data=y.data[cell:cell + 1, :]) for cell in range(y.p_dims)}
    return assemble_risk_maps(per_cell, grid_spec, thresholds)


@dataclass(frozen=True)
class Override:
    """Replace or scale one source row over a half-open step range [a, b)."""

    source: str
    steps: tuple[int, int]
    mode: Literal["set", "mul"]
    value: float

    def __post_init__(self) -> None:
        if self.mode not in ("set", "mul"):
            raise ValidationError(f"override mode must be 'set' or 'mul', got {self.mode!r}")
        if not np.isfinite(self.value):
            raise ValidationError(f"override value must be finite, got {self.value}")
        a, b = self.steps
        if a < 0 or b <= a:
            raise ValidationError(f"override steps must satisfy 0 <= a < b, got [{a}, {b})")


@dataclass(frozen=True)
class Scenario:
    """A baseline feature matrix plus user overrides for what-if evaluation."""

    baseline: FeatureMatrix
    overrides: tuple[Override, ...] = ()
    description: str = ""

    def __post_init__(self) -> None:
        for override in self.overrides:
            if override.source not in self.baseline.source_labels:
                raise UnknownSourceError(
                    f"override targets unknown source {override.source!r}; "
                    f"known: {', '.join(self.baseline.source_labels)}"
                )
            if override.steps[1] > self.baseline.n_steps:
                raise ValidationError(
                    f"override on {override.source!r} ends at step {override.steps[1]}, "
                    f"baseline has {self.baseline.n_steps}"
                )


def scenario_from_dict(baseline: FeatureMatrix, doc: dict) -> Scenario:
    """Build a scenario from the published JSON shape."""
    if not isinstance(doc, dict):
        raise FormatError("scenario document must be an object")
    overrides = []
    for i, entry in enumerate(doc.get("overrides", [])):
        try:
            overrides.append(Override(
                source=str(entry["source"]),
                steps=(int(entry["steps"][0]), int(entry["steps"][1])),
                mode=entry["mode"],
                value=float(entry["value"]),
            ))
        except (KeyError, TypeError, IndexError) as exc:
            raise FormatError(f"override {i} is malformed: {entry!r}") from exc
    return Scenario(
        baseline=baseline,
        overrides=tuple(overrides),
        description=str(doc.get("description", "")),
    )


def scenario_to_dict(scenario: Scenario) -> dict:
    return {
        "description": scenario.description,
        "overrides": [
            {"source": o.source, "steps": [o.steps[0], o.steps[1]], "mode": o.mode, "value": o.value}
            for o in scenario.overrides
        ],
    }


def apply_scenario(scenario: Scenario) -> FeatureMatrix:
    """Copy of the baseline with overrides applied in order (later wins)."""
    data = scenario.baseline.data.copy()
    for override in scenario.overrides:
        row = scenario.baseline.row(override.source)
        a, b = override.steps
        if override.mode == "set":
            data[row, a:b] = override.value
        else:
            data[row, a:b] *= override.value
    return FeatureMatrix(data=data, source_labels=scenario.baseline.source_labels)


def evaluate_scenario(
    model: LstmModel,
    scenario: Scenario,
    grid_spec: GridSpec,
    thresholds: RiskThresholds,
) -> tuple[list[RiskMap], list[float]]:
    """Predict -> squash -> assemble, plus the mean-risk trajectory."""
    features = apply_scenario(scenario)
    y = predict(model, features)
    maps = risk_maps_from_prediction(y, grid_spec, thresholds)
    return maps, [m.mean_risk for m in maps]


def risk_map_to_dict(risk_map: RiskMap) -> dict:
    return {
        "format_version": RISKMAP_FORMAT_VERSION,
        "timestamp": risk_map.timestamp.isoformat(),
        "rows": risk_map.rows,
        "cols": risk_map.cols,
        "bbox": risk_map.bbox.to_dict(),
        "resolution": risk_map.resolution,
        "risk": [float(v) for v in risk_map.risk.reshape(-1)],
        "levels": list(risk_map.levels),
        "thresholds": risk_map.thresholds.to_dict(),
    }


def risk_map_from_dict(doc: dict) -> RiskMap:
    try:
        thresholds = RiskThresholds(
            low_upper=float(doc["thresholds"]["low_upper"]),
            medium_upper=float(doc["thresholds"]["medium_upper"]),
        )
        rows = int(doc["rows"])
        cols = int(doc["cols"])
        return RiskMap(
            timestamp=date.fromisoformat(doc["timestamp"]),
            rows=rows,
            cols=cols,
            bbox=BBox.from_dict(doc["bbox"]),
            resolution=doc["resolution"],
            risk=np.asarray(doc["risk"], dtype=np.float64).reshape(rows, cols),
            levels=tuple(doc["levels"]),
            thresholds=thresholds,
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"malformed risk map document: {exc}") from exc


def export_risk_map(risk_map: RiskMap, format: str) -> bytes:
    """Serialize one map: 'json' at full precision, or 'pgm' (plain P2, 8-bit).

    PGM grey = round-half-up(risk * 255); the comment line carries the
    timestamp and bbox so images stay self-describing.
    """
    if format == "json":
        return (json.dumps(risk_map_to_dict(risk_map)) + "\n").encode()
    if format == "pgm":
        grey = np.floor(risk_map.risk * 255.0 + 0.5).astype(int)
        bbox = risk_map.bbox
        lines = [
            "P2",
            f"# {risk_map.timestamp.isoformat()} bbox={bbox.lat_min},{bbox.lat_max},{bbox.lon_min},{bbox.lon_max}",
            f"{risk_map.cols} {risk_map.rows}",
            "255",
        ]
        for r in range(risk_map.rows):
            lines.append(" ".join(str(int(v)) for v in grey[r]))
        return ("\n".join(lines) + "\n").encode()
    raise ValidationError(f"unsupported export format {format!r}; use 'json' or 'pgm'")
