"""Synthetic risk labels from forward-looking case growth.

No labeled risk dataset exists, so training targets are generated from the
case series itself: the label at bucket t reflects how much the case level
grows over a forward window that starts ``lag_units`` buckets later (the
incubation-style delay found by the correlation sweep). The formula is
versioned so every trained model records which label protocol produced it.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .risk import squash_to_risk
from .series import BucketedSeries

LABEL_FORMULA_VERSION = "growth-v1"


@dataclass(frozen=True)
class GrowthLabels:
    """Raw (pre-squash) targets and their [0,1] risk view per bucket index."""

    formula_version: str
    lag_units: int
    horizon_buckets: int
    scale: float
    bucket_indices: tuple[int, ...]
    raw: np.ndarray
    risk: np.ndarray

    def config(self) -> dict:
        return {
            "formula_version": self.formula_version,
            "lag_units": self.lag_units,
            "horizon_buckets": self.horizon_buckets,
            "scale": self.scale,
        }


def growth_risk_labels(
    cases: BucketedSeries,
    lag_units: int,
    horizon_buckets: int = 3,
    scale: float = 1.0,
) -> GrowthLabels:
    """Label bucket t by the relative growth of cases over a delayed window.

    raw(t)  = ((future_mean - present) / (present + 1)) / scale
    risk(t) = logistic(raw(t))

    where future_mean averages buckets t+lag .. t+lag+horizon-1. Buckets are
    only labeled when the present bucket and the whole future window carry
    data; the +1 keeps the ratio defined when a region reports zero cases.
    """
    if lag_units < 0:
        raise ValidationError(f"lag_units must be >= 0, got {lag_units}")
    if horizon_buckets < 1:
        raise ValidationError(f"horizon_buckets must be >= 1, got {horizon_buckets}")
    if not scale > 0:
        raise ValidationError(f"scale must be positive, got {scale}")

    indices: list[int] = []
    raw: list[float] = []
    for t in range(cases.first_index, cases.last_index - lag_units - horizon_buckets + 2):
        present = cases.value_at(t)
        if present is None:
            continue
        window = [cases.value_at(t + lag_units + k) for k in range(horizon_buckets)]
        if any(v is None for v in window):
            continue
        future_mean = float(np.mean([float(v) for v in window]))
        raw.append(((future_mean - present) / (present + 1.0)) / scale)
        indices.append(t)
    if not indices:
        raise ValidationError("no bucket has a complete present value and future window")

    raw_arr = np.asarray(raw, dtype=np.float64)
    return GrowthLabels(
        formula_version=LABEL_FORMULA_VERSION,
        lag_units=lag_units,
        horizon_buckets=horizon_buckets,
        scale=scale,
        bucket_indices=tuple(indices),
        raw=raw_arr,
        risk=squash_to_risk(raw_arr),
    )
