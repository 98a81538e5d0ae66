"""Retraining-frequency backtesting for global demand forecasting models.

Thin re-export of the compiled core module.
"""

from ._core import (  # noqa: F401
    EngineError,
    FriedmanResult,
    Panel,
    cost_of_ct,
    default_quantile_levels,
    enumerate_origins,
    filter_min_length,
    friedman_nemenyi,
    ingest_csv,
    rmsse,
    run_config,
    seasonal_naive,
    sql,
    synthetic_panel,
    validate_config,
    write_demand_csv,
    write_report,
)
from ._core import __version__  # noqa: F401
