"""Pollutant/case-series lag analytics and LSTM risk-map forecasting.

Pipeline stages: ingest rasters and case series (grids, series), correlate
them across delays (correlation), train and verify the LSTM (lstm,
estimator), turn predictions into risk maps and what-if scenarios (risk,
labels), and expose everything over HTTP (service) and a CLI (cli).
"""

from .correlation import (
    LagCorrelationReport,
    ScatterSeries,
    best_delay_from_table,
    delay_to_days,
    lag_sweep,
    pearson,
    scatter_series,
)
from .errors import AirriskError
from .estimator import LstmRegressor
from .grids import (
    BBox,
    GeoGrid,
    GridSeries,
    RegionMask,
    RegionalStats,
    bbox_to_mask,
    grid_series_to_regional_series,
    load_grid_series,
    load_region_mask,
    regional_stats,
    save_grid_series,
    subset_region,
)
from .lstm import (
    CellState,
    FeatureMatrix,
    LstmModel,
    TargetMatrix,
    TrainConfig,
    TrainRecord,
    backward,
    cell_step,
    forward,
    gradient_check,
    init_model,
    input_gradient,
    load_model,
    loss,
    predict,
    save_model,
    train,
)
from .risk import (
    GridSpec,
    Override,
    RiskMap,
    RiskThresholds,
    Scenario,
    apply_scenario,
    assemble_risk_maps,
    evaluate_scenario,
    export_risk_map,
    risk_maps_from_prediction,
    squash_to_risk,
)
from .series import (
    AlignedPair,
    Bucket,
    BucketedSeries,
    ScalarSeries,
    align,
    bucket_mean,
    interpolate_gaps,
    load_case_series,
)

__version__ = "0.1.0"
