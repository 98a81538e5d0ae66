#pragma once

#include <optional>
#include <string>
#include <vector>

#include "retrainbench/analysis.hpp"
#include "retrainbench/backtest.hpp"

namespace retrainbench {

/// Fully resolved run configuration. Parsed from one JSON file with nested
/// sections (dataset / features / models / backtest / analysis / output);
/// every defaulted field is echoed back by to_json() so runs are
/// self-describing. Key-by-key reference in docs/config.md.
struct RunConfig {
    // dataset
    std::string dataset_source = "synthetic";  // "synthetic" or "csv"
    Frequency frequency = Frequency::weekly;
    int min_obs = kMinObsWeekly;
    std::string demand_csv;
    std::optional<std::string> statics_csv;
    std::optional<std::string> calendar_csv;
    SyntheticSpec synthetic;

    // features
    FeatureConfig features;

    // models
    std::vector<ModelFamily> families = {ModelFamily::pooled_linear, ModelFamily::gbt,
                                         ModelFamily::mlp};
    ModelHyperparams hyper;

    // backtest
    BacktestConfig backtest;

    // analysis
    double alpha = 0.05;
    CostModel cost;

    // output
    std::string output_dir = "out";
    bool dump_features = false;
    int jobs = 1;

    /// Cross-field validation; returns human-readable warnings (first error
    /// wins and is thrown as ConfigError).
    std::vector<std::string> validate() const;

    std::string to_json() const;  // resolved dump, round-trips through parse
};

RunConfig parse_run_config(const std::string& json_text);
RunConfig load_run_config(const std::string& path);

}  // namespace retrainbench
