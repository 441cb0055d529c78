import json
import sys
from datetime import date, timedelta
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))  # make oracles importable

from airrisk.grids import BBox, GeoGrid, GridSeries, RegionMask
from airrisk.series import Bucket, BucketedSeries, ScalarSeries

ANCHOR = date(2020, 1, 1)


@pytest.fixture
def unit_bbox() -> BBox:
    return BBox(lat_min=44.0, lat_max=46.0, lon_min=8.0, lon_max=11.0)


def make_grid(values, nodata=None, bbox=None) -> GeoGrid:
    values = np.asarray(values, dtype=np.float64)
    if nodata is None:
        nodata = np.zeros(values.shape, dtype=bool)
    return GeoGrid(
        rows=values.shape[0],
        cols=values.shape[1],
        bbox=bbox or BBox(lat_min=44.0, lat_max=46.0, lon_min=8.0, lon_max=11.0),
        values=values,
        nodata=np.asarray(nodata, dtype=bool),
    )


def make_mask(inside, name="test-region") -> RegionMask:
    inside = np.asarray(inside, dtype=bool)
    return RegionMask(name=name, rows=inside.shape[0], cols=inside.shape[1], inside=inside)


def daily_series(values, kind="pollutant_mean", start=ANCHOR) -> ScalarSeries:
    dates = tuple(start + timedelta(days=i) for i in range(len(values)))
    return ScalarSeries(dates=dates, values=tuple(float(v) for v in values), kind=kind)


def buckets_from_values(values, window_days=5, first_index=0, anchor=ANCHOR) -> BucketedSeries:
    """Build a bucketed series from mean values; None marks a gap bucket."""
    buckets = []
    for offset, value in enumerate(values):
        index = first_index + offset
        buckets.append(Bucket(
            index=index,
            start=anchor + timedelta(days=index * window_days),
            mean=None if value is None else float(value),
            valid_count=0 if value is None else window_days,
        ))
    return BucketedSeries(window_days=window_days, buckets=tuple(buckets))


def write_raster_file(path: Path, rows, cols, frames, bbox=None) -> Path:
    """frames: list of (iso_date, values_list, nodata_indices)."""
    bbox = bbox or {"lat_min": 44.0, "lat_max": 46.0, "lon_min": 8.0, "lon_max": 11.0}
    doc = {
        "rows": rows,
        "cols": cols,
        "bbox": bbox,
        "frames": [
            {"date": d, "values": list(values), "nodata": list(nodata)}
            for d, values, nodata in frames
        ],
    }
    path.write_text(json.dumps(doc))
    return path
