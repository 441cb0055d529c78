"""Pearson correlation and the delayed-correlation sweep between series.

The sweep shifts the case series forward: delay k pairs the pollutant bucket
at t with the case bucket at t+k, and the best delay is the one with the most
positive coefficient. All arithmetic is double precision; display rounding
happens only at serialization time.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    InsufficientOverlapError,
    NoValidDelayError,
    UndefinedCorrelationError,
    ValidationError,
)
from .series import AlignedPair

REPORT_FORMAT_VERSION = 1
DEFAULT_MIN_OVERLAP = 3


def pearson(x: Sequence[float], y: Sequence[float]) -> float:
    """Product-moment correlation coefficient of two equal-length sequences.

    Raises :class:`UndefinedCorrelationError` when either input has zero
    variance; the result is never silently reported as 0.
    """
    xs = np.asarray(x, dtype=np.float64)
    ys = np.asarray(y, dtype=np.float64)
    if xs.ndim != 1 or ys.ndim != 1 or xs.size != ys.size:
        raise ValidationError(f"length mismatch: {xs.size} vs {ys.size}")
    if xs.size < 2:
        raise ValidationError(f"need at least 2 points, got {xs.size}")
    dx = xs - xs.mean()
    dy = ys - ys.mean()
    sxx = float(dx @ dx)
    syy = float(dy @ dy)
    if sxx == 0.0 or syy == 0.0:
        raise UndefinedCorrelationError("zero variance input makes the coefficient undefined")
    return float((dx @ dy) / np.sqrt(sxx * syy))


@dataclass(frozen=True)
class LagEntry:
    delay_units: int
    pcc: float
    n_pairs: int


@dataclass(frozen=True)
class LagCorrelationReport:
    """PCC per delay unit for one region, plus the best delay and day count."""

    region_name: str
    window_days: int
    entries: tuple[LagEntry, ...]
    best_delay_units: int
    best_pcc: float
    best_delay_days: int
    min_overlap: int
    skipped: tuple[tuple[int, str], ...] = ()

    def __post_init__(self) -> None:
        if not self.entries:
            raise ValidationError("report must contain at least one delay entry")
        for entry in self.entries:
            if not -1.0 - 1e-12 <= entry.pcc <= 1.0 + 1e-12:
                raise ValidationError(f"pcc {entry.pcc} outside [-1, 1] at delay {entry.delay_units}")
            if entry.n_pairs < self.min_overlap:
                raise ValidationError(
                    f"delay {entry.delay_units} kept with {entry.n_pairs} pairs < min_overlap {self.min_overlap}"
                )
        best = max(e.pcc for e in self.entries)
        if self.best_pcc != best:
            raise ValidationError("best_pcc does not match the entries")
        if self.best_delay_days != self.best_delay_units * self.window_days:
            raise ValidationError("best_delay_days must be best_delay_units * window_days")

    def to_dict(self) -> dict:
        return {
            "format_version": REPORT_FORMAT_VERSION,
            "region_name": self.region_name,
            "window_days": self.window_days,
            "min_overlap": self.min_overlap,
            "entries": [
                {
                    "delay_units": e.delay_units,
                    "pcc": e.pcc,
                    "pcc_display": f"{e.pcc:.4f}",
                    "n_pairs": e.n_pairs,
                }
                for e in self.entries
            ],
            "skipped": [{"delay_units": d, "reason": r} for d, r in self.skipped],
            "best_delay_units": self.best_delay_units,
            "best_pcc": self.best_pcc,
            "best_pcc_display": f"{self.best_pcc:.4f}",
            "best_delay_days": self.best_delay_days,
        }


def report_from_dict(doc: dict) -> LagCorrelationReport:
    return LagCorrelationReport(
        region_name=doc["region_name"],
        window_days=int(doc["window_days"]),
        entries=tuple(
            LagEntry(int(e["delay_units"]), float(e["pcc"]), int(e["n_pairs"]))
            for e in doc["entries"]
        ),
        best_delay_units=int(doc["best_delay_units"]),
        best_pcc=float(doc["best_pcc"]),
        best_delay_days=int(doc["best_delay_days"]),
        min_overlap=int(doc["min_overlap"]),
        skipped=tuple((int(s["delay_units"]), str(s["reason"])) for s in doc.get("skipped", [])),
    )


def write_report(report: LagCorrelationReport, path: str | Path) -> None:
    Path(path).write_text(json.dumps(report.to_dict(), indent=2) + "\n")


def _pairs_at_delay(pair: AlignedPair, delay: int) -> tuple[np.ndarray, np.ndarray]:
    """Gap-free (pollutant[t], cases[t+delay]) values inside the common range."""
    first, last = pair.common_range
    xs: list[float] = []
    ys: list[float] = []
    for t in range(first, last - delay + 1):
        p = pair.pollutant.value_at(t)
        c = pair.cases.value_at(t + delay)
        if p is None or c is None:
            continue
        xs.append(p)
        ys.append(c)
    return np.asarray(xs), np.asarray(ys)


def lag_sweep(
    pair: AlignedPair,
    max_delay_units: int,
    min_overlap: int = DEFAULT_MIN_OVERLAP,
    region_name: str = "region",
) -> LagCorrelationReport:
    """Correlate pollutant vs forward-shifted cases for delays 0..max.

    Delays whose gap-free overlap falls below ``min_overlap`` or whose
    coefficient is undefined are omitted from the entries and noted in
    ``skipped``. The best delay is the argmax of signed pcc, ties broken
    toward the smaller delay.
    """
    if max_delay_units < 0:
        raise ValidationError(f"max_delay_units must be >= 0, got {max_delay_units}")
    if min_overlap < 2:
        raise ValidationError(f"min_overlap must be >= 2, got {min_overlap}")

    entries: list[LagEntry] = []
    skipped: list[tuple[int, str]] = []
    for delay in range(max_delay_units + 1):
        xs, ys = _pairs_at_delay(pair, delay)
        if xs.size < min_overlap:
            skipped.append((delay, f"overlap {xs.size} below min_overlap {min_overlap}"))
            continue
        try:
            r = pearson(xs, ys)
        except UndefinedCorrelationError as exc:
            skipped.append((delay, str(exc)))
            continue
        entries.append(LagEntry(delay_units=delay, pcc=r, n_pairs=int(xs.size)))

    if not entries:
        raise NoValidDelayError(
            f"no delay in 0..{max_delay_units} had {min_overlap}+ pairs with defined correlation"
        )
    best = entries[0]
    for entry in entries[1:]:
        if entry.pcc > best.pcc:
            best = entry
    return LagCorrelationReport(
        region_name=region_name,
        window_days=pair.window_days,
        entries=tuple(entries),
        best_delay_units=best.delay_units,
        best_pcc=best.pcc,
        best_delay_days=delay_to_days(best.delay_units, pair.window_days),
        min_overlap=min_overlap,
        skipped=tuple(skipped),
    )


def best_delay_from_table(pcc_by_delay: Iterable[tuple[int, float]]) -> tuple[int, float]:
    """Entry with the maximum pcc; ties break toward the smallest delay."""
    rows = sorted(pcc_by_delay, key=lambda row: row[0])
    if not rows:
        raise ValidationError("empty pcc table")
    best = rows[0]
    for row in rows[1:]:
        if row[1] > best[1]:
            best = row
    return (int(best[0]), float(best[1]))


def delay_to_days(delay_units: int, window_days: int) -> int:
    """Convert delay units to calendar days (exact multiplication)."""
    if window_days < 1:
        raise ValidationError(f"window_days must be >= 1, got {window_days}")
    if delay_units < 0:
        raise ValidationError(f"delay_units must be >= 0, got {delay_units}")
    return delay_units * window_days


@dataclass(frozen=True)
class ScatterSeries:
    """Numbered scatter points: cases mean on x, pollutant mean on y."""

    points: tuple[tuple[int, float, float], ...]

    def __post_init__(self) -> None:
        for i, point in enumerate(self.points):
            if point[0] != i:
                raise ValidationError(f"sequence_index not consecutive at position {i}")

    def write_csv(self, path: str | Path) -> None:
        with Path(path).open("w", newline="") as handle:
            writer = csv.writer(handle)
            writer.writerow(["index", "cases_mean", "pollutant_mean"])
            for index, cases_mean, pollutant_mean in self.points:
                writer.writerow([index, repr(cases_mean), repr(pollutant_mean)])


def scatter_series(
    pair: AlignedPair,
    delay_units: int,
    min_overlap: int = DEFAULT_MIN_OVERLAP,
) -> ScatterSeries:
    """Ordered (index, cases at t+delay, pollutant at t) pairs for plotting."""
    if delay_units < 0:
        raise ValidationError(f"delay_units must be >= 0, got {delay_units}")
    first, last = pair.common_range
    if delay_units > last - first:
        raise ValidationError(
            f"delay {delay_units} exceeds the common range span {last - first}"
        )
    xs, ys = _pairs_at_delay(pair, delay_units)
    if xs.size < min_overlap:
        raise InsufficientOverlapError(
            f"only {xs.size} gap-free pairs at delay {delay_units}, need {min_overlap}"
        )
    points = tuple((i, float(c), float(p)) for i, (p, c) in enumerate(zip(xs, ys)))
    return ScatterSeries(points=points)
