import json
import math
from datetime import date

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from airrisk.errors import (
    EmptyRegionError,
    FormatError,
    InconsistencyError,
    ShapeMismatchError,
    ValidationError,
)
from airrisk.grids import (
    BBox,
    GeoGrid,
    RegionMask,
    bbox_to_mask,
    grid_series_to_dict,
    grid_series_to_regional_series,
    load_grid_series,
    load_region_mask,
    region_mask_to_dict,
    regional_stats,
    save_grid_series,
    subset_region,
)

from conftest import make_grid, make_mask, write_raster_file
from oracles import two_pass_stats


class TestLoadGridSeries:
    def test_two_frames_with_nodata_cell(self, tmp_path):
        path = write_raster_file(tmp_path / "r.json", 2, 2, [
            ("2020-01-01", [1.0, 2.0, 3.0, 4.0], [2]),
            ("2020-01-02", [5.0, 6.0, 7.0, 8.0], []),
        ])
        series = load_grid_series(path)
        assert len(series) == 2
        first = series.frames[0][1]
        assert first.nodata[1, 0]
        assert int(first.nodata.sum()) == 1
        assert series.dates == (date(2020, 1, 1), date(2020, 1, 2))

    def test_duplicate_timestamp_rejected(self, tmp_path):
        path = write_raster_file(tmp_path / "r.json", 1, 1, [
            ("2020-01-01", [1.0], []),
            ("2020-01-01", [2.0], []),
        ])
        with pytest.raises(InconsistencyError, match="duplicate timestamp"):
            load_grid_series(path)

    def test_frame_shape_mismatch_rejected(self, tmp_path):
        path = write_raster_file(tmp_path / "r.json", 3, 3, [
            ("2020-01-01", [float(i) for i in range(9)], []),
            ("2020-01-02", [1.0, 2.0, 3.0, 4.0], []),
        ])
        with pytest.raises(ShapeMismatchError, match=r"got 4 values, expected 3x3"):
            load_grid_series(path)

    def test_unsorted_frames_are_sorted(self, tmp_path):
        path = write_raster_file(tmp_path / "r.json", 1, 1, [
            ("2020-01-03", [3.0], []),
            ("2020-01-01", [1.0], []),
        ])
        series = load_grid_series(path)
        assert series.dates == (date(2020, 1, 1), date(2020, 1, 3))

    def test_null_value_means_nodata(self, tmp_path):
        path = write_raster_file(tmp_path / "r.json", 1, 2, [
            ("2020-01-01", [None, 2.0], []),
        ])
        series = load_grid_series(path)
        assert series.frames[0][1].nodata[0, 0]

    def test_invalid_json_reports_line(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text("{\n  broken")
        with pytest.raises(FormatError, match="line 2"):
            load_grid_series(path)

    def test_unknown_schema_tag(self, tmp_path):
        path = write_raster_file(tmp_path / "r.json", 1, 1, [("2020-01-01", [1.0], [])])
        with pytest.raises(FormatError, match="schema tag"):
            load_grid_series(path, schema="geotiff")

    def test_round_trip_bit_exact(self, tmp_path):
        path = write_raster_file(tmp_path / "r.json", 2, 3, [
            ("2020-01-01", [0.1, 0.2, 0.30000000000000004, 1e-300, 4.0, 5.5], [3]),
            ("2020-01-06", [9.1, 8.2, 7.3, 6.4, 5.5, 4.6], [0, 5]),
        ])
        series = load_grid_series(path)
        out = tmp_path / "round.json"
        save_grid_series(series, out)
        again = load_grid_series(out)
        assert again.dates == series.dates
        for (_, a), (_, b) in zip(series.frames, again.frames):
            assert np.array_equal(a.values, b.values)
            assert np.array_equal(a.nodata, b.nodata)


class TestMasks:
    def test_load_mask(self, tmp_path):
        path = tmp_path / "m.json"
        path.write_text(json.dumps({"name": "Lombardy", "rows": 2, "cols": 2, "inside": [0, 1]}))
        mask = load_region_mask(path)
        assert mask.name == "Lombardy"
        assert mask.inside[0].all() and not mask.inside[1].any()

    def test_mask_round_trip(self):
        mask = make_mask([[True, False], [False, True]], name="x")
        doc = region_mask_to_dict(mask)
        assert doc["inside"] == [0, 3]

    def test_all_false_mask_rejected(self):
        with pytest.raises(EmptyRegionError):
            make_mask([[False, False]])

    def test_bbox_to_mask_selects_center_cells(self, unit_bbox):
        region = BBox(lat_min=44.0, lat_max=45.0, lon_min=8.0, lon_max=9.5)
        mask = bbox_to_mask(2, 3, unit_bbox, region, name="south-west")
        # rows are north->south: row 1 covers lat 44..45; cols 0..1 cover lon 8..10
        assert mask.inside.tolist() == [[False, False, False], [True, True, False]]


class TestSubsetRegion:
    def test_mask_top_row(self):
        grid = make_grid([[1.0, 2.0], [3.0, 4.0]])
        mask = make_mask([[True, True], [False, False]])
        sub = subset_region(grid, mask)
        assert not sub.nodata[0].any()
        assert sub.nodata[1].all()
        assert sub.bbox == grid.bbox
        assert np.array_equal(sub.values, grid.values)

    def test_all_true_mask_is_identity(self):
        grid = make_grid([[1.0, 2.0], [3.0, 4.0]], nodata=[[False, True], [False, False]])
        sub = subset_region(grid, make_mask(np.ones((2, 2))))
        assert np.array_equal(sub.nodata, grid.nodata)
        assert np.array_equal(sub.values, grid.values)

    def test_shape_mismatch(self):
        grid = make_grid([[1.0, 2.0]])
        with pytest.raises(ShapeMismatchError):
            subset_region(grid, make_mask(np.ones((2, 2))))

    def test_idempotent(self):
        rng = np.random.default_rng(3)
        grid = make_grid(rng.normal(size=(4, 5)), nodata=rng.random((4, 5)) < 0.2)
        mask = make_mask(rng.random((4, 5)) < 0.6)
        once = subset_region(grid, mask)
        twice = subset_region(once, mask)
        assert np.array_equal(once.values, twice.values)
        assert np.array_equal(once.nodata, twice.nodata)


class TestRegionalStats:
    def test_hand_computed_std(self):
        # valid values {1,2,3}: population std = sqrt(2/3)
        grid = make_grid([[1.0, 2.0], [3.0, 99.0]], nodata=[[False, False], [False, True]])
        stats = regional_stats(grid, make_mask(np.ones((2, 2))))
        assert stats.min == 1.0
        assert stats.max == 3.0
        assert stats.mean == 2.0
        assert stats.std == pytest.approx(math.sqrt(2.0 / 3.0), abs=1e-12)
        assert stats.valid_count == 3

    def test_constant_field(self):
        grid = make_grid(np.full((3, 3), 7.0))
        stats = regional_stats(grid, make_mask(np.ones((3, 3))))
        assert stats.min == stats.max == stats.mean == 7.0
        assert stats.std == 0.0

    def test_all_nodata_is_error(self):
        grid = make_grid([[1.0, 2.0]], nodata=[[True, True]])
        with pytest.raises(EmptyRegionError):
            regional_stats(grid, make_mask([[True, True]]))

    def test_all_true_mask_equals_whole_grid(self):
        rng = np.random.default_rng(11)
        values = rng.normal(size=(5, 4)) * 10
        grid = make_grid(values)
        stats = regional_stats(grid, make_mask(np.ones((5, 4))))
        ref_min, ref_max, ref_mean, ref_std = two_pass_stats(values.reshape(-1).tolist())
        assert stats.min == ref_min and stats.max == ref_max
        assert stats.mean == pytest.approx(ref_mean, rel=1e-12)
        assert stats.std == pytest.approx(ref_std, rel=1e-12)

    @given(st.integers(0, 2**32 - 1))
    @settings(max_examples=40, deadline=None)
    def test_matches_two_pass_oracle(self, seed):
        rng = np.random.default_rng(seed)
        rows, cols = int(rng.integers(1, 6)), int(rng.integers(1, 6))
        values = rng.normal(size=(rows, cols)) * rng.uniform(0.1, 50)
        nodata = rng.random((rows, cols)) < 0.3
        inside = rng.random((rows, cols)) < 0.7
        if not inside.any():
            inside[0, 0] = True
        grid = make_grid(values, nodata=nodata)
        mask = make_mask(inside)
        valid = values[inside & ~nodata]
        if valid.size == 0:
            with pytest.raises(EmptyRegionError):
                regional_stats(grid, mask)
            return
        stats = regional_stats(grid, mask)
        ref_min, ref_max, ref_mean, ref_std = two_pass_stats(valid.tolist())
        assert stats.min <= stats.mean <= stats.max
        assert stats.mean == pytest.approx(ref_mean, rel=1e-12, abs=1e-300)
        assert stats.std == pytest.approx(ref_std, rel=1e-12, abs=1e-12)


class TestRegionalSeries:
    def test_per_date_means(self):
        g1 = make_grid([[2.0, 4.0]])
        g2 = make_grid([[4.0, 6.0]])
        from airrisk.grids import GridSeries
        series = GridSeries(frames=((date(2020, 1, 1), g1), (date(2020, 1, 2), g2)))
        out = grid_series_to_regional_series(series, make_mask([[True, True]]))
        assert out.points == ((date(2020, 1, 1), 3.0), (date(2020, 1, 2), 5.0))
        assert out.kind == "pollutant_mean"

    def test_fully_nodata_date_omitted(self):
        g1 = make_grid([[2.0]], nodata=[[True]])
        g2 = make_grid([[4.0]])
        from airrisk.grids import GridSeries
        series = GridSeries(frames=((date(2020, 1, 1), g1), (date(2020, 1, 2), g2)))
        out = grid_series_to_regional_series(series, make_mask([[True]]))
        assert out.dates == (date(2020, 1, 2),)

    def test_single_cell_mask_reproduces_cell(self):
        rng = np.random.default_rng(5)
        values = rng.normal(size=(3, 2, 2))
        from airrisk.grids import GridSeries
        frames = tuple(
            (date(2020, 1, 1 + i), make_grid(values[i])) for i in range(3)
        )
        series = GridSeries(frames=frames)
        mask = make_mask([[False, True], [False, False]])
        out = grid_series_to_regional_series(series, mask)
        assert list(out.values) == pytest.approx(values[:, 0, 1].tolist())


class TestGridValidation:
    def test_nonfinite_unmasked_value_rejected(self):
        with pytest.raises(ValidationError):
            make_grid([[np.inf, 1.0]])

    def test_nonfinite_masked_value_allowed(self):
        grid = make_grid([[np.nan, 1.0]], nodata=[[True, False]])
        assert grid.valid_values().tolist() == [1.0]

    def test_bbox_ordering_enforced(self):
        with pytest.raises(ValidationError):
            BBox(lat_min=5.0, lat_max=4.0, lon_min=0.0, lon_max=1.0)
