import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from airrisk.correlation import (
    best_delay_from_table,
    delay_to_days,
    lag_sweep,
    pearson,
    report_from_dict,
    scatter_series,
    write_report,
)
from airrisk.errors import (
    InsufficientOverlapError,
    NoValidDelayError,
    UndefinedCorrelationError,
    ValidationError,
)
from airrisk.fixtures import REFERENCE_PCC_LOMBARDY, REFERENCE_PCC_WUHAN
from airrisk.series import align

from conftest import buckets_from_values
from oracles import pearson_direct, sweep_direct

finite_floats = st.floats(-1e6, 1e6, allow_nan=False, allow_infinity=False)


class TestPearson:
    def test_identical_inputs_give_one(self):
        assert pearson([1.0, 2.0, 5.0], [1.0, 2.0, 5.0]) == pytest.approx(1.0, abs=1e-12)

    def test_negated_input_gives_minus_one(self):
        x = [1.0, 4.0, 2.0, 9.0]
        assert pearson(x, [-v for v in x]) == pytest.approx(-1.0, abs=1e-12)

    def test_hand_computed_value(self):
        # r = 3 / sqrt(2 * 14 / 3)
        assert pearson([1, 2, 3], [1, 2, 4]) == pytest.approx(0.981981, abs=1e-6)

    def test_length_mismatch(self):
        with pytest.raises(ValidationError, match="length mismatch"):
            pearson([1, 2, 3], [1, 2])

    def test_too_short(self):
        with pytest.raises(ValidationError, match="at least 2"):
            pearson([1.0], [2.0])

    def test_zero_variance_is_never_silent_zero(self):
        with pytest.raises(UndefinedCorrelationError):
            pearson([3.0, 3.0, 3.0], [1.0, 2.0, 3.0])
        with pytest.raises(UndefinedCorrelationError):
            pearson([1.0, 2.0, 3.0], [5.0, 5.0, 5.0])

    @given(st.lists(st.tuples(finite_floats, finite_floats), min_size=2, max_size=60))
    @settings(max_examples=120, deadline=None)
    def test_symmetry(self, pairs):
        x = [p[0] for p in pairs]
        y = [p[1] for p in pairs]
        try:
            r_xy = pearson(x, y)
        except UndefinedCorrelationError:
            return
        assert r_xy == pytest.approx(pearson(y, x), abs=1e-12)

    @given(
        st.lists(st.tuples(finite_floats, finite_floats), min_size=3, max_size=40),
        st.floats(0.01, 100.0),
        st.floats(-1e3, 1e3),
    )
    @settings(max_examples=120, deadline=None)
    def test_positive_affine_invariance(self, pairs, a, b):
        x = np.array([p[0] for p in pairs])
        y = np.array([p[1] for p in pairs])
        try:
            base = pearson(x, y)
        except UndefinedCorrelationError:
            return
        assert pearson(a * x + b, y) == pytest.approx(base, abs=1e-9)

    def test_matches_direct_formula_oracle(self):
        rng = np.random.default_rng(42)
        for _ in range(300):
            n = int(rng.integers(3, 200))
            x = rng.normal(size=n)
            y = rng.normal(size=n) + 0.3 * x
            r = pearson(x, y)
            assert abs(r) <= 1.0 + 1e-12
            assert r == pytest.approx(pearson_direct(x.tolist(), y.tolist()), abs=1e-12)


class TestLagSweep:
    def make_shifted_pair(self):
        pollutant_vals = [1.0, 3.0, 2.0, 5.0, 4.0, 7.0, 6.0, 9.0]
        # cases(t) = pollutant(t - 2); the first two buckets hold unrelated data
        cases_vals = [2.0, 8.0] + pollutant_vals[:6]
        pollutant = buckets_from_values(pollutant_vals)
        cases = buckets_from_values(cases_vals)
        return align(pollutant, cases), pollutant_vals, cases_vals

    def test_exact_shift_gives_unit_pcc_at_its_delay(self):
        pair, _, _ = self.make_shifted_pair()
        report = lag_sweep(pair, max_delay_units=5)
        by_delay = {e.delay_units: e for e in report.entries}
        assert by_delay[2].pcc == pytest.approx(1.0, abs=1e-12)
        assert by_delay[2].n_pairs == 6

    def test_best_delay_matches_brute_force_oracle(self):
        pair, pollutant_vals, cases_vals = self.make_shifted_pair()
        report = lag_sweep(pair, max_delay_units=5)
        oracle = sweep_direct(pollutant_vals, cases_vals, max_delay=5)
        assert report.best_delay_units == 2
        for entry in report.entries:
            assert entry.pcc == pytest.approx(oracle[entry.delay_units], abs=1e-12)
        assert all(oracle[d] < 1.0 for d in oracle if d != 2)

    def test_constant_pollutant_raises_no_valid_delay(self):
        pair = align(
            buckets_from_values([5.0] * 8),
            buckets_from_values([1.0, 2.0, 3.0, 1.0, 2.0, 3.0, 1.0, 2.0]),
        )
        with pytest.raises(NoValidDelayError):
            lag_sweep(pair, max_delay_units=3)

    def test_low_overlap_delays_are_skipped_and_noted(self):
        pair = align(
            buckets_from_values([1.0, 4.0, 2.0, 6.0, 3.0]),
            buckets_from_values([2.0, 1.0, 5.0, 3.0, 7.0]),
        )
        report = lag_sweep(pair, max_delay_units=4, min_overlap=3)
        kept = {e.delay_units for e in report.entries}
        skipped = {d for d, _ in report.skipped}
        assert kept == {0, 1, 2}
        assert skipped == {3, 4}
        for _, reason in report.skipped:
            assert "overlap" in reason

    def test_gap_buckets_excluded_from_pairs(self):
        pollutant = buckets_from_values([1.0, 2.0, None, 4.0, 5.0, 6.0])
        cases = buckets_from_values([2.0, 3.0, 4.0, None, 6.0, 7.0])
        pair = align(pollutant, cases)
        report = lag_sweep(pair, max_delay_units=1, min_overlap=3)
        by_delay = {e.delay_units: e for e in report.entries}
        # delay 0 loses t=2 (pollutant gap) and t=3 (cases gap)
        assert by_delay[0].n_pairs == 4
        # delay 1 loses t=2 (pollutant gap, and its cases partner t=3 is also the gap)
        assert by_delay[1].n_pairs == 4

    def test_lag_recovery_noise_free_and_noisy(self):
        rng = np.random.default_rng(2024)
        base = rng.normal(size=80)
        for lag in range(16):
            pollutant_vals = base[:40].tolist()
            cases_vals = [float(base[t - lag]) if t >= lag else float(base[40 + t])
                          for t in range(40)]
            pair = align(buckets_from_values(pollutant_vals), buckets_from_values(cases_vals))
            report = lag_sweep(pair, max_delay_units=15)
            assert report.best_delay_units == lag
            assert report.best_pcc == pytest.approx(1.0, abs=1e-12)

            noise = rng.normal(scale=0.1 * float(np.std(base[:40])), size=40)
            noisy_cases = [v + n for v, n in zip(cases_vals, noise)]
            pair = align(buckets_from_values(pollutant_vals), buckets_from_values(noisy_cases))
            report = lag_sweep(pair, max_delay_units=15)
            assert report.best_delay_units == lag
            others = [e.pcc for e in report.entries if e.delay_units != lag]
            assert report.best_pcc > max(others)

    def test_self_consistency_with_table_best(self):
        pair, _, _ = self.make_shifted_pair()
        report = lag_sweep(pair, max_delay_units=5)
        delay, pcc = best_delay_from_table(
            [(e.delay_units, e.pcc) for e in report.entries]
        )
        assert delay == report.best_delay_units
        assert pcc == report.best_pcc


class TestBestDelayFromTable:
    def test_reference_lombardy_column(self):
        table = list(enumerate(REFERENCE_PCC_LOMBARDY))
        assert best_delay_from_table(table) == (9, 0.8969)

    def test_reference_wuhan_column(self):
        table = list(enumerate(REFERENCE_PCC_WUHAN))
        assert best_delay_from_table(table) == (7, 0.4857)

    def test_tie_breaks_to_smallest_delay(self):
        assert best_delay_from_table([(0, 0.5), (1, 0.5)]) == (0, 0.5)

    def test_empty_table_rejected(self):
        with pytest.raises(ValidationError):
            best_delay_from_table([])


class TestDelayToDays:
    def test_reference_conversions(self):
        assert delay_to_days(9, 5) == 45
        assert delay_to_days(7, 5) == 35

    def test_zero_delay(self):
        assert delay_to_days(0, 5) == 0

    def test_bad_window(self):
        with pytest.raises(ValidationError):
            delay_to_days(1, 0)


class TestScatterSeries:
    def test_four_gap_free_buckets_at_delay_zero(self):
        pair = align(
            buckets_from_values([1.0, 2.0, 3.0, 4.0]),
            buckets_from_values([5.0, 6.0, 7.0, 8.0]),
        )
        scatter = scatter_series(pair, 0)
        assert scatter.points == ((0, 5.0, 1.0), (1, 6.0, 2.0), (2, 7.0, 3.0), (3, 8.0, 4.0))

    def test_delay_reduces_point_count_exactly(self):
        pollutant = buckets_from_values([float(i) for i in range(10)])
        cases = buckets_from_values([float(i * i % 7) for i in range(10)])
        pair = align(pollutant, cases)
        for k in range(5):
            assert len(scatter_series(pair, k).points) == 10 - k

    def test_gap_removes_exactly_touching_pairs(self):
        # brute-force enumeration on a 6-bucket fixture with one cases gap at t=3
        pollutant_vals = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0]
        cases_vals = [9.0, 8.0, 7.0, None, 5.0, 4.0]
        pair = align(buckets_from_values(pollutant_vals), buckets_from_values(cases_vals))
        for delay in (0, 1, 2):
            expected = []
            for t in range(6 - delay):
                p, c = pollutant_vals[t], cases_vals[t + delay]
                if p is None or c is None:
                    continue
                expected.append((c, p))
            got = [(c, p) for _, c, p in scatter_series(pair, delay).points]
            assert got == expected

    def test_insufficient_overlap_rejected(self):
        pair = align(
            buckets_from_values([1.0, None, None, 4.0]),
            buckets_from_values([5.0, 6.0, 7.0, 8.0]),
        )
        with pytest.raises(InsufficientOverlapError):
            scatter_series(pair, 0, min_overlap=3)

    def test_csv_output(self, tmp_path):
        pair = align(
            buckets_from_values([1.0, 2.0, 3.0]),
            buckets_from_values([4.0, 5.0, 6.0]),
        )
        path = tmp_path / "scatter.csv"
        scatter_series(pair, 0).write_csv(path)
        lines = path.read_text().strip().splitlines()
        assert lines[0] == "index,cases_mean,pollutant_mean"
        assert lines[1] == "0,4.0,1.0"


class TestReportSerialization:
    def test_report_json_has_display_rounding(self, tmp_path):
        pair = align(
            buckets_from_values([1.0, 3.0, 2.0, 5.0, 4.0, 7.0]),
            buckets_from_values([2.0, 1.5, 3.5, 2.5, 5.5, 4.5]),
        )
        report = lag_sweep(pair, max_delay_units=2, region_name="fixture")
        path = tmp_path / "report.json"
        write_report(report, path)
        doc = json.loads(path.read_text())
        assert doc["region_name"] == "fixture"
        for entry in doc["entries"]:
            assert entry["pcc_display"] == f"{entry['pcc']:.4f}"
        again = report_from_dict(doc)
        assert again.best_delay_units == report.best_delay_units
        assert again.entries == report.entries
