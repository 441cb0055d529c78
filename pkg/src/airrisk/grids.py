"""Georeferenced concentration rasters: loading, region masking, zonal stats.

Rasters are row-major with north-to-south rows and west-to-east columns.
Nodata cells (cloud-masked pixels, missing passes) are carried as a boolean
mask and excluded from every statistic; they are never interpolated here.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from datetime import date
from pathlib import Path
from typing import Iterable

import numpy as np

from .errors import (
    EmptyRegionError,
    FormatError,
    InconsistencyError,
    ShapeMismatchError,
    ValidationError,
)
from .series import ScalarSeries

RASTER_SCHEMA = "raster-json"
RASTER_FORMAT_VERSION = 1


@dataclass(frozen=True)
class BBox:
    """Geographic bounding box in degrees."""

    lat_min: float
    lat_max: float
    lon_min: float
    lon_max: float

    def __post_init__(self) -> None:
        if not self.lat_min < self.lat_max:
            raise ValidationError(f"bbox requires lat_min < lat_max, got {self.lat_min} >= {self.lat_max}")
        if not self.lon_min < self.lon_max:
            raise ValidationError(f"bbox requires lon_min < lon_max, got {self.lon_min} >= {self.lon_max}")

    def to_dict(self) -> dict:
        return {
            "lat_min": self.lat_min,
            "lat_max": self.lat_max,
            "lon_min": self.lon_min,
            "lon_max": self.lon_max,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "BBox":
        try:
            return cls(
                lat_min=float(doc["lat_min"]),
                lat_max=float(doc["lat_max"]),
                lon_min=float(doc["lon_min"]),
                lon_max=float(doc["lon_max"]),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise FormatError(f"malformed bbox: {doc!r}") from exc


@dataclass(frozen=True)
class GeoGrid:
    """One raster of concentration values plus its nodata mask.

    ``values`` has shape (rows, cols); entries under ``nodata`` are ignored
    by all statistics but preserved for lossless round-trips.
    """

    rows: int
    cols: int
    bbox: BBox
    values: np.ndarray
    nodata: np.ndarray

    def __post_init__(self) -> None:
        if self.rows < 1 or self.cols < 1:
            raise ValidationError(f"grid needs positive shape, got {self.rows}x{self.cols}")
        values = np.asarray(self.values, dtype=np.float64)
        nodata = np.asarray(self.nodata, dtype=bool)
        if values.shape != (self.rows, self.cols):
            raise ShapeMismatchError(
                f"values shape {values.shape} does not match declared {self.rows}x{self.cols}"
            )
        if nodata.shape != values.shape:
            raise ShapeMismatchError(
                f"nodata shape {nodata.shape} does not match values shape {values.shape}"
            )
        if not np.all(np.isfinite(values[~nodata])):
            raise ValidationError("non-finite value in unmasked raster cell")
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "nodata", nodata)

    @property
    def shape(self) -> tuple[int, int]:
        return (self.rows, self.cols)

    def valid_values(self) -> np.ndarray:
        """Flat array of values at cells carrying data."""
        return self.values[~self.nodata]


@dataclass(frozen=True)
class GridSeries:
    """Time-stamped sequence of homogeneous grids."""

    frames: tuple[tuple[date, GeoGrid], ...]

    def __post_init__(self) -> None:
        if not self.frames:
            raise ValidationError("grid series must contain at least one frame")
        first = self.frames[0][1]
        prev: date | None = None
        for stamp, grid in self.frames:
            if prev is not None and stamp <= prev:
                raise InconsistencyError(f"timestamps not strictly increasing at {stamp.isoformat()}")
            if grid.shape != first.shape:
                raise InconsistencyError(
                    f"frame {stamp.isoformat()} has shape {grid.shape}, expected {first.shape}"
                )
            if grid.bbox != first.bbox:
                raise InconsistencyError(f"frame {stamp.isoformat()} has a different bbox")
            prev = stamp

    def __len__(self) -> int:
        return len(self.frames)

    @property
    def shape(self) -> tuple[int, int]:
        return self.frames[0][1].shape

    @property
    def bbox(self) -> BBox:
        return self.frames[0][1].bbox

    @property
    def dates(self) -> tuple[date, ...]:
        return tuple(stamp for stamp, _ in self.frames)


@dataclass(frozen=True)
class RegionMask:
    """Boolean cell selection naming a geographic region."""

    name: str
    rows: int
    cols: int
    inside: np.ndarray

    def __post_init__(self) -> None:
        inside = np.asarray(self.inside, dtype=bool)
        if inside.shape != (self.rows, self.cols):
            raise ShapeMismatchError(
                f"mask shape {inside.shape} does not match declared {self.rows}x{self.cols}"
            )
        if not inside.any():
            raise EmptyRegionError(f"mask {self.name!r} selects no cells")
        object.__setattr__(self, "inside", inside)

    @property
    def shape(self) -> tuple[int, int]:
        return (self.rows, self.cols)


@dataclass(frozen=True)
class RegionalStats:
    """Zonal statistics over the valid in-region cells of one grid."""

    min: float
    max: float
    mean: float
    std: float
    valid_count: int


def _parse_frame(doc: dict, index: int, rows: int, cols: int, bbox: BBox) -> tuple[date, GeoGrid]:
    where = f"frame {index}"
    if not isinstance(doc, dict):
        raise FormatError(f"{where}: expected an object, got {type(doc).__name__}")
    try:
        stamp = date.fromisoformat(str(doc["date"]))
    except KeyError as exc:
        raise FormatError(f"{where}: missing 'date'") from exc
    except ValueError as exc:
        raise FormatError(f"{where}: unparsable date {doc.get('date')!r}") from exc
    where = f"frame {index} ({stamp.isoformat()})"

    raw = doc.get("values")
    if not isinstance(raw, list):
        raise FormatError(f"{where}: 'values' must be a list")
    if len(raw) != rows * cols:
        raise ShapeMismatchError(
            f"{where}: got {len(raw)} values, expected {rows}x{cols} = {rows * cols}"
        )

    nodata = np.zeros(rows * cols, dtype=bool)
    for cell in doc.get("nodata", []):
        if not isinstance(cell, int) or not 0 <= cell < rows * cols:
            raise FormatError(f"{where}: nodata index {cell!r} out of range 0..{rows * cols - 1}")
        nodata[cell] = True

    values = np.zeros(rows * cols, dtype=np.float64)
    for cell, entry in enumerate(raw):
        if entry is None:
            # null is shorthand for nodata; keep 0.0 as the placeholder value
            nodata[cell] = True
            continue
        if not isinstance(entry, (int, float)):
            raise FormatError(f"{where}: cell {cell} is not a number: {entry!r}")
        values[cell] = float(entry)
        if not np.isfinite(values[cell]) and not nodata[cell]:
            raise ValidationError(f"{where}: cell {cell} is non-finite and not marked nodata")

    grid = GeoGrid(rows=rows, cols=cols, bbox=bbox,
                   values=values.reshape(rows, cols), nodata=nodata.reshape(rows, cols))
    return stamp, grid


def load_grid_series(path: str | Path, schema: str = RASTER_SCHEMA) -> GridSeries:
    """Load a raster series from its JSON container.

    Args:
        path: file holding ``{"rows", "cols", "bbox", "frames": [...]}``.
        schema: raster format tag; only ``raster-json`` is understood.

    Returns:
        Validated :class:`GridSeries` with frames sorted by timestamp.
    """
    if schema != RASTER_SCHEMA:
        raise FormatError(f"unknown raster schema tag {schema!r}")
    path = Path(path)
    try:
        doc = json.loads(path.read_text())
    except OSError as exc:
        raise FormatError(f"cannot read raster file {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: invalid JSON at line {exc.lineno}: {exc.msg}") from exc
    return grid_series_from_dict(doc, origin=str(path))


def grid_series_from_dict(doc: dict, origin: str = "<payload>") -> GridSeries:
    """Build a GridSeries from an already-parsed raster document."""
    if not isinstance(doc, dict):
        raise FormatError(f"{origin}: raster document must be an object")
    try:
        rows = int(doc["rows"])
        cols = int(doc["cols"])
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"{origin}: missing or malformed 'rows'/'cols'") from exc
    if rows < 1 or cols < 1:
        raise ValidationError(f"{origin}: shape {rows}x{cols} is not positive")
    bbox = BBox.from_dict(doc.get("bbox", {}))
    frames_doc = doc.get("frames")
    if not isinstance(frames_doc, list) or not frames_doc:
        raise FormatError(f"{origin}: 'frames' must be a non-empty list")

    frames = [_parse_frame(frame, i, rows, cols, bbox) for i, frame in enumerate(frames_doc)]
    frames.sort(key=lambda item: item[0])
    seen: set[date] = set()
    for stamp, _ in frames:
        if stamp in seen:
            raise InconsistencyError(f"{origin}: duplicate timestamp {stamp.isoformat()}")
        seen.add(stamp)
    return GridSeries(frames=tuple(frames))


def grid_series_to_dict(series: GridSeries) -> dict:
    frames = []
    for stamp, grid in series.frames:
        flat = grid.values.reshape(-1)
        mask = grid.nodata.reshape(-1)
        frames.append({
            "date": stamp.isoformat(),
            "values": [float(v) for v in flat],
            "nodata": [int(i) for i in np.flatnonzero(mask)],
        })
    return {
        "format_version": RASTER_FORMAT_VERSION,
        "rows": series.shape[0],
        "cols": series.shape[1],
        "bbox": series.bbox.to_dict(),
        "frames": frames,
    }


def save_grid_series(series: GridSeries, path: str | Path) -> None:
    Path(path).write_text(json.dumps(grid_series_to_dict(series)))


def load_region_mask(path: str | Path) -> RegionMask:
    """Load a region mask from JSON ``{"name", "rows", "cols", "inside": [...]}``."""
    path = Path(path)
    try:
        doc = json.loads(path.read_text())
    except OSError as exc:
        raise FormatError(f"cannot read mask file {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: invalid JSON at line {exc.lineno}: {exc.msg}") from exc
    return region_mask_from_dict(doc, origin=str(path))


def region_mask_from_dict(doc: dict, origin: str = "<payload>") -> RegionMask:
    if not isinstance(doc, dict):
        raise FormatError(f"{origin}: mask document must be an object")
    try:
        rows = int(doc["rows"])
        cols = int(doc["cols"])
        cells = doc["inside"]
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"{origin}: missing or malformed 'rows'/'cols'/'inside'") from exc
    if not isinstance(cells, list):
        raise FormatError(f"{origin}: 'inside' must be a list of cell indices")
    inside = np.zeros(rows * cols, dtype=bool)
    for cell in cells:
        if not isinstance(cell, int) or not 0 <= cell < rows * cols:
            raise FormatError(f"{origin}: inside index {cell!r} out of range 0..{rows * cols - 1}")
        inside[cell] = True
    return RegionMask(name=str(doc.get("name", "region")), rows=rows, cols=cols,
                      inside=inside.reshape(rows, cols))


def region_mask_to_dict(mask: RegionMask) -> dict:
    return {
        "name": mask.name,
        "rows": mask.rows,
        "cols": mask.cols,
        "inside": [int(i) for i in np.flatnonzero(mask.inside.reshape(-1))],
    }


def bbox_to_mask(rows: int, cols: int, grid_bbox: BBox, region_bbox: BBox, name: str) -> RegionMask:
    """Mask cells whose centers fall inside ``region_bbox``.

    Convenience for carving a rectangular study region out of a wider raster;
    cell centers follow the north-to-south / west-to-east layout.
    """
    lat_step = (grid_bbox.lat_max - grid_bbox.lat_min) / rows
    lon_step = (grid_bbox.lon_max - grid_bbox.lon_min) / cols
    lat_centers = grid_bbox.lat_max - lat_step * (np.arange(rows) + 0.5)
    lon_centers = grid_bbox.lon_min + lon_step * (np.arange(cols) + 0.5)
    in_lat = (lat_centers >= region_bbox.lat_min) & (lat_centers <= region_bbox.lat_max)
    in_lon = (lon_centers >= region_bbox.lon_min) & (lon_centers <= region_bbox.lon_max)
    inside = np.outer(in_lat, in_lon)
    if not inside.any():
        raise EmptyRegionError(f"bbox for {name!r} covers no cell centers")
    return RegionMask(name=name, rows=rows, cols=cols, inside=inside)


def _check_mask(grid: GeoGrid, mask: RegionMask) -> None:
    if mask.shape != grid.shape:
        raise ShapeMismatchError(f"mask shape {mask.shape} does not match grid shape {grid.shape}")


def subset_region(grid: GeoGrid, mask: RegionMask) -> GeoGrid:
    """Return the grid with everything outside the mask flagged as nodata."""
    _check_mask(grid, mask)
    return GeoGrid(rows=grid.rows, cols=grid.cols, bbox=grid.bbox,
                   values=grid.values, nodata=grid.nodata | ~mask.inside)


def regional_stats(grid: GeoGrid, mask: RegionMask) -> RegionalStats:
    """Min/max/mean/population-std over valid in-region cells.

    Raises :class:`EmptyRegionError` when every in-region cell is nodata.
    """
    _check_mask(grid, mask)
    valid = mask.inside & ~grid.nodata
    count = int(valid.sum())
    if count == 0:
        raise EmptyRegionError(f"region {mask.name!r} has no valid cells")
    vals = grid.values[valid]
    return RegionalStats(
        min=float(vals.min()),
        max=float(vals.max()),
        mean=float(vals.mean()),
        std=float(vals.std()),  # population std: divisor == valid_count
        valid_count=count,
    )


def grid_series_to_regional_series(series: GridSeries, mask: RegionMask) -> ScalarSeries:
    """Per-date regional mean; dates whose region is fully nodata are omitted."""
    if mask.shape != series.shape:
        raise ShapeMismatchError(
            f"mask shape {mask.shape} does not match series shape {series.shape}"
        )
    dates: list[date] = []
    means: list[float] = []
    for stamp, grid in series.frames:
        valid = mask.inside & ~grid.nodata
        if not valid.any():
            continue
        dates.append(stamp)
        means.append(float(grid.values[valid].mean()))
    if not dates:
        raise EmptySeriesError(f"region {mask.name!r} has no dates with valid cells")
    return ScalarSeries(dates=tuple(dates), values=tuple(means), kind="pollutant_mean")
