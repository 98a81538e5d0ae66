#pragma once

#include <mutex>

#include "retrainbench/gbt.hpp"
#include "retrainbench/linear.hpp"
#include "retrainbench/mlp.hpp"
#include "retrainbench/models.hpp"

namespace retrainbench {

/// Expanding-window rolling-origin setup. Origins advance by `step_size`; a
/// model is refit every `r` origins (anchored at the first origin).
struct BacktestConfig {
    int horizon = 13;
    int test_size = 52;
    int step_size = 1;
    std::vector<int> retrain_set = {1, 2, 3, 4, 6, 8, 10, 13, 26, 52};
    int baseline_r = 1;
    Frequency frequency = Frequency::weekly;
    int season = 1;       // seasonal period for metric scaling
    int min_train = 1;    // observations required before the first origin
    bool scale_from_first_origin = false;  // metric denominators frozen at the first origin

    static BacktestConfig defaults_for(Frequency f);
    void validate() const;
};

/// 0-based indices of the last training timestamp of each evaluation round:
/// counts n_total - test_size, ..., n_total - horizon stepped by step_size.
std::vector<int> enumerate_origins(const BacktestConfig& config, int n_total);

struct FitEvent {
    int origin = -1;
    double wall_seconds = 0.0;
    double cpu_seconds = 0.0;
    std::int64_t train_rows = 0;
};

struct BacktestRun {
    ModelFamily family = ModelFamily::pooled_linear;
    int r = 1;
    std::vector<double> quantile_levels;
    std::vector<ForecastRecord> forecasts;
    std::vector<FitEvent> fit_events;
    std::vector<int> fitted_at_per_origin;  // origin of the parameters used at each round
    double predict_wall_seconds = 0.0;
    double predict_cpu_seconds = 0.0;
    std::uint64_t rng_seed = 0;
    bool failed = false;
    std::string error;

    double ct_wall_seconds() const;
    double ct_cpu_seconds() const;
};

struct ModelHyperparams {
    LinearFitOptions linear;
    GbtParams gbt;
    MlpParams mlp;
    std::vector<double> quantile_levels = default_quantile_levels();
    std::uint64_t rng_seed = 0;
};

/// Serializes fit/predict timing sections when grid cells run concurrently so
/// CT measurements never overlap.
class TimingGate {
public:
    std::unique_lock<std::mutex> enter() { return std::unique_lock<std::mutex>(mutex_); }

private:
    std::mutex mutex_;
};

std::uint64_t cell_seed(std::uint64_t base_seed, ModelFamily family, int r);

BacktestRun run_backtest(const TimeSeriesPanel& panel, ModelFamily family,
                         const FeatureConfig& features, const BacktestConfig& config, int r,
                         const ModelHyperparams& hyper, TimingGate& gate);

/// One run per (family x r), grid order deterministic; failed cells are
/// recorded and the grid continues. `jobs` > 1 runs cells concurrently with
/// timing sections serialized through one shared gate.
std::vector<BacktestRun> run_grid(const TimeSeriesPanel& panel,
                                  const std::vector<ModelFamily>& families,
                                  const FeatureConfig& features, const BacktestConfig& config,
                                  const ModelHyperparams& hyper, int jobs = 1);

}  // namespace retrainbench
