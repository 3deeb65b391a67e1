"""Cell load profiling, classification, forecasting and on/off planning."""

from ._cellplan import (
    BINS_PER_DAY,
    DimensionError,
    Error,
    FemtoDatabase,
    InvalidArgument,
    KmeansModel,
    LoadSeries,
    ParseError,
    QosConfig,
    SvmModel,
    SvrModel,
    evaluate_plan,
    generate_station_set,
    generate_weekly,
    ingest,
    kmeans_fit,
    normalized_mse,
    plan,
    train_kmeans,
    train_svm,
    train_svr,
    tune_svr,
)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
