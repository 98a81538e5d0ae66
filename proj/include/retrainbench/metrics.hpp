#pragma once

#include "retrainbench/backtest.hpp"

namespace retrainbench {

/// Root mean squared error scaled by the in-sample one-step MSE of the
/// seasonal naive model over `train`. Throws ZeroDenominator when the scaling
/// term is not strictly positive.
double rmsse(std::span<const double> actuals, std::span<const double> forecasts,
             std::span<const double> train, int season);

/// Mean pinball loss at level q scaled by the in-sample seasonal-naive MAE.
double sql(std::span<const double> actuals, std::span<const double> quantile_forecasts, double q,
           std::span<const double> train, int season);

/// Unweighted mean of sql over the level set; forecasts are row-major
/// (step, level) aligned with `levels`. Throws MissingQuantile on a level
/// mismatch.
double smql(std::span<const double> actuals, std::span<const double> quantile_forecasts,
            std::span<const double> levels, std::span<const double> required_levels,
            std::span<const double> train, int season);

struct MetricRow {
    ModelFamily family;
    int r;
    std::uint32_t series;
    std::int32_t origin;
    double rmsse;
    double smql;
    std::vector<double> sql;  // per level
};

struct SeriesMetrics {  // averaged over origins
    ModelFamily family;
    int r;
    std::uint32_t series;
    double rmsse;
    double smql;
    std::vector<double> sql;
};

struct MetricAggregate {
    ModelFamily family;
    int r;
    bool failed = false;
    std::string error;
    double mean_rmsse = 0.0;
    double mean_smql = 0.0;
    double ct_wall_seconds = 0.0;
    double ct_cpu_seconds = 0.0;
    double rel_rmsse = 1.0;
    double rel_smql = 1.0;
    double rel_ct = 1.0;
    std::size_t n_series = 0;
    std::size_t n_excluded = 0;
};

struct MetricFrame {
    std::vector<double> quantile_levels;
    std::vector<int> retrain_set;
    int baseline_r = 1;
    std::vector<MetricRow> rows;               // per (model, r, series, origin)
    std::vector<SeriesMetrics> series_detail;  // per (model, r, series)
    std::vector<MetricAggregate> aggregates;   // per (model, r)
    std::vector<std::string> excluded_series;  // ids with undefined scaling denominators
};

/// Per-(series, origin) metrics with expanding in-sample scaling, then
/// unweighted means over origins and over series; rel_* normalize to the
/// baseline scenario of the same family. Series with a zero scaling
/// denominator at any origin are excluded from every scenario.
MetricFrame aggregate(const std::vector<BacktestRun>& runs, const TimeSeriesPanel& panel,
                      const BacktestConfig& config);

}  // namespace retrainbench
