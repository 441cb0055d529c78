"""Deterministic fixtures shared by tests, demos, and the dashboard.

Includes the published delay-sweep coefficients for the two case-study
regions (used as regression fixtures), a synthetic raster/case bundle with a
known injected lag, and a hand-built model whose risk output is monotone in
one chosen source.
"""

from __future__ import annotations

from datetime import date, timedelta

import numpy as np

from .grids import BBox, GeoGrid, GridSeries, RegionMask
from .lstm import LstmModel
from .series import ScalarSeries

# Reference PCC-by-delay columns (5-day delay units) for the two case-study
# regions; best delays are 9 units (Lombardy) and 7 units (Wuhan).
REFERENCE_PCC_LOMBARDY: tuple[float, ...] = (
    0.0770, 0.2773, 0.4983, 0.6629, 0.7180, 0.7918, 0.8774, 0.8092,
    0.7532, 0.8969, 0.8334, 0.8403, 0.8736, 0.7830, 0.8302, 0.8854,
)
REFERENCE_PCC_WUHAN: tuple[float, ...] = (
    -0.2474, -0.2514, -0.2496, -0.1775, 0.0271, 0.1934, 0.3842, 0.4857,
    0.3905, 0.2969, 0.2905, 0.1813, -0.0652, -0.2000, 0.0291, 0.1762,
)


def make_lag_bundle(
    lag_units: int,
    n_buckets: int = 36,
    window_days: int = 5,
    rows: int = 4,
    cols: int = 4,
    seed: int = 7,
    start: date = date(2020, 1, 1),
    region_name: str = "fixture-region",
) -> tuple[GridSeries, ScalarSeries, RegionMask]:
    """Raster series plus a case series delayed by exactly ``lag_units`` buckets.

    The raster carries one frame per day whose regional mean follows a seeded
    positive signal; daily cases reproduce that signal shifted forward by
    lag_units * window_days days (rounded to integer counts), so a correlation
    sweep recovers lag_units as the best delay.
    """
    rng = np.random.default_rng(seed)
    n_days = n_buckets * window_days
    shift = lag_units * window_days

    # smooth-ish positive pollutant signal, one value per day
    signal = 1.0 + 0.5 * np.abs(rng.normal(size=n_days + shift)).cumsum() % 3.0
    signal = signal + rng.uniform(0.0, 0.8, size=signal.size)

    bbox = BBox(lat_min=44.0, lat_max=46.0, lon_min=8.0, lon_max=11.0)
    cell_offsets = rng.uniform(-0.25, 0.25, size=(rows, cols))
    frames = []
    for d in range(n_days):
        values = signal[d] + cell_offsets
        nodata = np.zeros((rows, cols), dtype=bool)
        if d % 11 == 0:  # sprinkle nodata to exercise masking
            nodata[d % rows, d % cols] = True
        frames.append((start + timedelta(days=d),
                       GeoGrid(rows=rows, cols=cols, bbox=bbox, values=values, nodata=nodata)))
    grids = GridSeries(frames=tuple(frames))

    case_dates = []
    case_values = []
    for d in range(n_days):
        stamp = start + timedelta(days=d)
        if d < shift:
            count = int(rng.integers(0, 5))
        else:
            count = max(0, int(round(40.0 * signal[d - shift])))
        case_dates.append(stamp)
        case_values.append(float(count))
    cases = ScalarSeries(dates=tuple(case_dates), values=tuple(case_values), kind="new_cases")

    inside = np.zeros((rows, cols), dtype=bool)
    inside[: max(1, rows - 1), : max(1, cols - 1)] = True
    mask = RegionMask(name=region_name, rows=rows, cols=cols, inside=inside)
    return grids, cases, mask


def monotone_risk_model(
    n_in: int,
    n_out: int,
    source_index: int,
    weight: float = 0.6,
    gain: float = 1.0,
) -> LstmModel:
    """Model whose every output strictly increases with one input source.

    Gates are saturated open by large positive biases, so memory accumulates
    tanh(weight * x_source) step by step; the output head scales the hidden
    activation by ``gain``. Useful for verifying that lowering the source
    lowers risk at every timestep.
    """
    if not 0 <= source_index < n_in:
        raise ValueError(f"source_index {source_index} outside 0..{n_in - 1}")
    n_hidden = 1
    w_gate = np.zeros((n_hidden, n_in + n_hidden))
    w_c = np.zeros((n_hidden, n_in + n_hidden))
    w_c[0, source_index] = weight
    saturate = np.full(n_hidden, 50.0)  # sigmoid(50) is 1.0 to double precision
    return LstmModel(
        n_in=n_in, n_hidden=n_hidden, n_out=n_out, seed=0,
        w_i=w_gate, w_f=w_gate, w_o=w_gate, w_c=w_c,
        b_i=saturate, b_f=saturate, b_o=saturate, b_c=np.zeros(n_hidden),
        w_y=np.full((n_out, n_hidden), gain), b_y=np.zeros(n_out),
    )
