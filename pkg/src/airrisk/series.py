"""Daily scalar series, fixed-window bucket means, and series alignment."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from datetime import date, timedelta
from pathlib import Path
from typing import Iterable, Literal

from .errors import (
    AlignmentError,
    EmptySeriesError,
    FormatError,
    InconsistencyError,
    ValidationError,
)

SeriesKind = Literal["pollutant_mean", "new_cases", "other_covariate"]
_KINDS = ("pollutant_mean", "new_cases", "other_covariate")


@dataclass(frozen=True)
class ScalarSeries:
    """Dated scalar observations (daily cadence, strictly increasing dates)."""

    dates: tuple[date, ...]
    values: tuple[float, ...]
    kind: SeriesKind

    def __post_init__(self) -> None:
        if self.kind not in _KINDS:
            raise ValidationError(f"unknown series kind {self.kind!r}")
        if len(self.dates) != len(self.values):
            raise ValidationError("dates and values must have equal length")
        if not self.dates:
            raise EmptySeriesError("series has no points")
        for a, b in zip(self.dates, self.dates[1:]):
            if b <= a:
                raise InconsistencyError(f"dates not strictly increasing at {b.isoformat()}")
        for d, v in zip(self.dates, self.values):
            if not math.isfinite(v):
                raise ValidationError(f"non-finite value on {d.isoformat()}")
            if self.kind == "new_cases" and v < 0:
                raise ValidationError(f"negative case count {v} on {d.isoformat()}")

    def __len__(self) -> int:
        return len(self.dates)

    @property
    def points(self) -> tuple[tuple[date, float], ...]:
        return tuple(zip(self.dates, self.values))


def load_case_series(path: str | Path) -> ScalarSeries:
    """Parse a ``date,new_cases`` CSV into a new-cases series sorted by date."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise FormatError(f"cannot read case file {path}: {exc}") from exc

    reader = csv.reader(text.splitlines())
    try:
        header = next(reader)
    except StopIteration as exc:
        raise FormatError(f"{path}: file is empty, expected 'date,new_cases' header") from exc
    if [h.strip().lower() for h in header] != ["date", "new_cases"]:
        raise FormatError(f"{path}: expected header 'date,new_cases', got {','.join(header)!r}")

    points: list[tuple[date, float]] = []
    for lineno, row in enumerate(reader, start=2):
        if not row or all(not col.strip() for col in row):
            continue
        if len(row) != 2:
            raise FormatError(f"{path}:{lineno}: expected 2 columns, got {len(row)}")
        try:
            stamp = date.fromisoformat(row[0].strip())
        except ValueError as exc:
            raise FormatError(f"{path}:{lineno}: unparsable date {row[0]!r}") from exc
        try:
            count = int(row[1].strip())
        except ValueError as exc:
            raise FormatError(f"{path}:{lineno}: unparsable case count {row[1]!r}") from exc
        if count < 0:
            raise ValidationError(f"{path}:{lineno}: negative case count {count}")
        points.append((stamp, float(count)))

    if not points:
        raise EmptySeriesError(f"{path}: no data rows below the header")
    points.sort(key=lambda p: p[0])
    for (a, _), (b, _) in zip(points, points[1:]):
        if a == b:
            raise InconsistencyError(f"{path}: duplicate date {a.isoformat()}")
    return ScalarSeries(
        dates=tuple(p[0] for p in points),
        values=tuple(p[1] for p in points),
        kind="new_cases",
    )


@dataclass(frozen=True)
class Bucket:
    """One fixed-width window: observation mean plus how many days contributed.

    ``mean`` is None for a gap. An interpolated bucket carries a mean with
    ``valid_count == 0`` so consumers can still tell it apart from data.
    """

    index: int
    start: date
    mean: float | None
    valid_count: int


@dataclass(frozen=True)
class BucketedSeries:
    """Consecutive fixed-width window means of a daily series."""

    window_days: int
    buckets: tuple[Bucket, ...]

    def __post_init__(self) -> None:
        if self.window_days < 1:
            raise ValidationError(f"window_days must be >= 1, got {self.window_days}")
        if not self.buckets:
            raise EmptySeriesError("bucketed series has no buckets")
        first = self.buckets[0]
        if first.index < 0:
            raise ValidationError(f"bucket indices must be >= 0, got {first.index}")
        for offset, bucket in enumerate(self.buckets):
            if bucket.index != first.index + offset:
                raise InconsistencyError(
                    f"bucket indices not consecutive: expected {first.index + offset}, got {bucket.index}"
                )
            expected_start = first.start + timedelta(days=self.window_days * offset)
            if bucket.start != expected_start:
                raise InconsistencyError(
                    f"bucket {bucket.index} starts {bucket.start.isoformat()}, expected {expected_start.isoformat()}"
                )
            if not 0 <= bucket.valid_count <= self.window_days:
                raise ValidationError(
                    f"bucket {bucket.index} valid_count {bucket.valid_count} outside 0..{self.window_days}"
                )
            if bucket.valid_count > 0 and (bucket.mean is None or not math.isfinite(bucket.mean)):
                raise ValidationError(f"bucket {bucket.index} has observations but no finite mean")
            if bucket.mean is not None and not math.isfinite(bucket.mean):
                raise ValidationError(f"bucket {bucket.index} mean is non-finite")

    def __len__(self) -> int:
        return len(self.buckets)

    @property
    def first_index(self) -> int:
        return self.buckets[0].index

    @property
    def last_index(self) -> int:
        return self.buckets[-1].index

    @property
    def anchor(self) -> date:
        """Calendar date where bucket index 0 starts."""
        return self.buckets[0].start - timedelta(days=self.window_days * self.buckets[0].index)

    def bucket_at(self, index: int) -> Bucket:
        if not self.first_index <= index <= self.last_index:
            raise IndexError(f"bucket {index} outside {self.first_index}..{self.last_index}")
        return self.buckets[index - self.first_index]

    def value_at(self, index: int) -> float | None:
        return self.bucket_at(index).mean

    def is_gap(self, index: int) -> bool:
        return self.bucket_at(index).mean is None

    def slice(self, first: int, last: int) -> "BucketedSeries":
        if first < self.first_index or last > self.last_index or first > last:
            raise AlignmentError(
                f"slice {first}..{last} outside bucket range {self.first_index}..{self.last_index}"
            )
        lo = first - self.first_index
        return BucketedSeries(window_days=self.window_days,
                              buckets=self.buckets[lo:lo + (last - first + 1)])


def bucket_mean(series: ScalarSeries, window_days: int, start_date: date | None = None) -> BucketedSeries:
    """Reduce a daily series to consecutive ``window_days``-wide means.

    Bucket i covers [start + i*window, start + (i+1)*window). Means use only
    the days actually present; a window with no observations is emitted as a
    gap (no mean, valid_count 0) rather than being interpolated.
    """
    if window_days < 1:
        raise ValidationError(f"window_days must be >= 1, got {window_days}")
    start = start_date if start_date is not None else series.dates[0]
    if series.dates[0] < start:
        raise ValidationError(
            f"series starts {series.dates[0].isoformat()}, before bucket anchor {start.isoformat()}"
        )

    last_offset = (series.dates[-1] - start).days
    n_buckets = last_offset // window_days + 1
    sums = [0.0] * n_buckets
    counts = [0] * n_buckets
    for stamp, value in zip(series.dates, series.values):
        i = (stamp - start).days // window_days
        sums[i] += value
        counts[i] += 1

    buckets = tuple(
        Bucket(
            index=i,
            start=start + timedelta(days=i * window_days),
            mean=sums[i] / counts[i] if counts[i] else None,
            valid_count=counts[i],
        )
        for i in range(n_buckets)
    )
    return BucketedSeries(window_days=window_days, buckets=buckets)


def interpolate_gaps(series: BucketedSeries) -> BucketedSeries:
    """Fill interior gaps linearly from the nearest bucket means on each side.

    Filled buckets keep valid_count 0. Leading and trailing gaps have only one
    neighbor and stay gaps.
    """
    known = [(b.index, b.mean) for b in series.buckets if b.mean is not None]
    if len(known) < 2:
        return series
    filled: list[Bucket] = []
    for bucket in series.buckets:
        if bucket.mean is not None:
            filled.append(bucket)
            continue
        left = next(((i, m) for i, m in reversed(known) if i < bucket.index), None)
        right = next(((i, m) for i, m in known if i > bucket.index), None)
        if left is None or right is None:
            filled.append(bucket)
            continue
        (li, lm), (ri, rm) = left, right
        mean = lm + (rm - lm) * (bucket.index - li) / (ri - li)
        filled.append(Bucket(index=bucket.index, start=bucket.start, mean=mean, valid_count=0))
    return BucketedSeries(window_days=series.window_days, buckets=tuple(filled))


@dataclass(frozen=True)
class AlignedPair:
    """Pollutant and case buckets trimmed to a shared index range."""

    pollutant: BucketedSeries
    cases: BucketedSeries
    common_range: tuple[int, int]

    def __post_init__(self) -> None:
        if self.pollutant.window_days != self.cases.window_days:
            raise ValidationError("aligned series must share window_days")
        first, last = self.common_range
        for side in (self.pollutant, self.cases):
            if side.first_index != first or side.last_index != last:
                raise InconsistencyError(
                    f"aligned side covers {side.first_index}..{side.last_index}, expected {first}..{last}"
                )

    @property
    def window_days(self) -> int:
        return self.pollutant.window_days


def align(pollutant: BucketedSeries, cases: BucketedSeries) -> AlignedPair:
    """Trim both series to their common bucket-index range.

    Requires the same window and the same calendar anchor so that equal bucket
    indices mean equal date windows. Gap buckets survive the trim; pairing
    steps skip them.
    """
    if pollutant.window_days != cases.window_days:
        raise ValidationError(
            f"window mismatch: {pollutant.window_days} vs {cases.window_days} days"
        )
    if pollutant.anchor != cases.anchor:
        raise AlignmentError(
            f"bucket anchors differ: {pollutant.anchor.isoformat()} vs {cases.anchor.isoformat()}"
        )
    first = max(pollutant.first_index, cases.first_index)
    last = min(pollutant.last_index, cases.last_index)
    if first > last:
        raise AlignmentError(
            f"no overlap: pollutant covers {pollutant.first_index}..{pollutant.last_index}, "
            f"cases {cases.first_index}..{cases.last_index}"
        )
    return AlignedPair(
        pollutant=pollutant.slice(first, last),
        cases=cases.slice(first, last),
        common_range=(first, last),
    )
