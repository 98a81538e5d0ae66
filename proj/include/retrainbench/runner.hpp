#pragma once

#include "retrainbench/config.hpp"

namespace retrainbench {

struct RunOutcome {
    std::string output_dir;
    std::size_t n_cells = 0;
    std::size_t n_failed = 0;
    std::vector<std::string> warnings;

    bool all_failed() const { return n_cells > 0 && n_failed == n_cells; }
    bool partial() const { return n_failed > 0 && n_failed < n_cells; }
};

/// Builds the panel described by the config (synthetic or CSV ingest plus
/// min-length filtering).
TimeSeriesPanel materialize_panel(const RunConfig& config);

/// Full pipeline: panel -> grid -> metrics -> stats/cost/optimal, writing
/// forecasts.csv, fits.csv, metrics.csv, metrics_detail.csv, stats.json,
/// cost.csv, optimal.csv, resolved_config.json and manifest.json into the
/// output directory. A manifest marking failure is written even when the run
/// aborts.
RunOutcome run_from_config(const RunConfig& config);

// Individual artifact writers (shared with tests).
void write_forecasts_csv(const std::vector<BacktestRun>& runs, const TimeSeriesPanel& panel,
                         const BacktestConfig& config, const std::vector<double>& levels,
                         const std::string& path);
void write_fits_csv(const std::vector<BacktestRun>& runs, const TimeSeriesPanel& panel,
                    const std::string& path);
void write_metrics_csv(const MetricFrame& frame, const std::string& path);
void write_metrics_detail_csv(const MetricFrame& frame, const TimeSeriesPanel& panel,
                              const std::string& path);
void write_stats_json(const MetricFrame& frame, double alpha,
                      const std::vector<ModelFamily>& families, const std::string& path);
void write_cost_csv(const std::vector<ScenarioCost>& costs, const std::string& path);
void write_optimal_csv(const OptimalFrequencyTable& rmsse_table,
                       const OptimalFrequencyTable& smql_table, const TimeSeriesPanel& panel,
                       const std::string& path);

}  // namespace retrainbench
