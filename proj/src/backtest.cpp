#include "retrainbench/backtest.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <thread>

#include <time.h>

#include "retrainbench/errors.hpp"

namespace retrainbench {

BacktestConfig BacktestConfig::defaults_for(Frequency f) {
    BacktestConfig config;
    config.frequency = f;
    if (f == Frequency::daily) {
        config.horizon = 28;
        config.test_size = 364;
        config.retrain_set = {7, 14, 21, 30, 60, 90, 120, 150, 180, 364};
        config.baseline_r = 7;
        config.season = 7;
    } else {
        config.horizon = 13;
        config.test_size = 52;
        config.retrain_set = {1, 2, 3, 4, 6, 8, 10, 13, 26, 52};
        config.baseline_r = 1;
        config.season = 1;
    }
    return config;
}

void BacktestConfig::validate() const {
    if (horizon < 1) throw ConfigError("horizon must be >= 1");
    if (test_size < 1) throw ConfigError("test_size must be >= 1");
    if (horizon > test_size) throw ConfigError("horizon must not exceed test_size");
    if (step_size < 1) throw ConfigError("step_size must be >= 1");
    if (retrain_set.empty()) throw ConfigError("retrain_set must be non-empty");
    for (int r : retrain_set) {
        if (r < 1 || r > test_size) {
            throw ConfigError("retrain scenario r=" + std::to_string(r) +
                              " outside [1, test_size=" + std::to_string(test_size) + "]");
        }
    }
    if (std::find(retrain_set.begin(), retrain_set.end(), baseline_r) == retrain_set.end()) {
        throw ConfigError("baseline_r=" + std::to_string(baseline_r) +
                          " is not in the retrain_set");
    }
    if (season < 1) throw ConfigError("season must be >= 1");
    if (min_train < 1) throw ConfigError("min_train must be >= 1");
}

std::vector<int> enumerate_origins(const BacktestConfig& config, int n_total) {
    config.validate();
    if (n_total < config.test_size + config.min_train) {
        throw InsufficientHistory("panel has " + std::to_string(n_total) +
                                  " observations; need at least test_size + min_train = " +
                                  std::to_string(config.test_size + config.min_train));
    }
    std::vector<int> origins;
    // Origin counts run from n_total - test_size to n_total - horizon; stored
    // as 0-based indices of the last training observation.
    for (int count = n_total - config.test_size; count <= n_total - config.horizon;
         count += config.step_size) {
        origins.push_back(count - 1);
    }
    return origins;
}

double BacktestRun::ct_wall_seconds() const {
    double total = predict_wall_seconds;
    for (const auto& event : fit_events) total += event.wall_seconds;
    return total;
}

double BacktestRun::ct_cpu_seconds() const {
    double total = predict_cpu_seconds;
    for (const auto& event : fit_events) total += event.cpu_seconds;
    return total;
}

std::uint64_t cell_seed(std::uint64_t base_seed, ModelFamily family, int r) {
    std::uint64_t x = base_seed ^ (0x9e3779b97f4a7c15ULL * (static_cast<std::uint64_t>(family) + 1) +
                                   static_cast<std::uint64_t>(r));
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

namespace {

double thread_cpu_seconds() {
    timespec ts{};
    clock_gettime(CLOCK_THREAD_CPUTIME_ID, &ts);
    return static_cast<double>(ts.tv_sec) + static_cast<double>(ts.tv_nsec) * 1e-9;
}

using WallClock = std::chrono::steady_clock;

double wall_seconds_since(WallClock::time_point start) {
    return std::chrono::duration<double>(WallClock::now() - start).count();
}

std::unique_ptr<GlobalModel> fit_family(ModelFamily family, const FeatureMatrix& matrix,
                                        const ModelHyperparams& hyper, std::uint64_t seed) {
    switch (family) {
        case ModelFamily::pooled_linear:
            return fit_pooled_linear(matrix, hyper.linear, hyper.quantile_levels);
        case ModelFamily::gbt:
            return fit_gbt(matrix, hyper.gbt, hyper.quantile_levels);
        case ModelFamily::mlp: {
            MlpParams params = hyper.mlp;
            params.rng_seed = seed;
            return fit_mlp(matrix, params, hyper.quantile_levels);
        }
        case ModelFamily::seasonal_naive:
            break;
    }
    throw ConfigError("seasonal_naive has no fitted parameters");
}

}  // namespace

BacktestRun run_backtest(const TimeSeriesPanel& panel, ModelFamily family,
                         const FeatureConfig& features, const BacktestConfig& config, int r,
                         const ModelHyperparams& hyper, TimingGate& gate) {
    config.validate();
    if (std::find(config.retrain_set.begin(), config.retrain_set.end(), r) ==
        config.retrain_set.end()) {
        throw ConfigError("scenario r=" + std::to_string(r) + " is not in the retrain_set");
    }

    const int n_total = static_cast<int>(panel.n_timestamps());
    const std::vector<int> origins = enumerate_origins(config, n_total);
    const int first_origin = origins.front();

    // Every series must support features and the seasonal benchmark at the
    // first origin; failing fast identifies the offender.
    const int warm = features.warm_up();
    for (std::size_t i = 0; i < panel.n_series(); ++i) {
        const int observed = first_origin - panel.start_offset(i) + 1;
        const int needed = std::max(warm + 1, config.season + 1);
        if (observed < needed) {
            throw InsufficientHistory("series '" + panel.series_ids()[i] + "' has " +
                                      std::to_string(observed) +
                                      " observations at the first origin; needs " +
                                      std::to_string(needed));
        }
    }

    BacktestRun run;
    run.family = family;
    run.r = r;
    run.quantile_levels = hyper.quantile_levels;
    run.rng_seed = cell_seed(hyper.rng_seed, family, r);
    run.forecasts.reserve(origins.size() * panel.n_series() *
                          static_cast<std::size_t>(config.horizon));
    run.fitted_at_per_origin.reserve(origins.size());

    const bool uses_features = family != ModelFamily::seasonal_naive;
    std::unique_ptr<GlobalModel> model;

    std::vector<double> row_buf;
    std::vector<double> quantile_buf(hyper.quantile_levels.size());

    for (std::size_t k = 0; k < origins.size(); ++k) {
        const int origin = origins[k];
        if (k % static_cast<std::size_t>(r) == 0) {
            if (uses_features) {
                FeatureMatrix matrix = build_training_matrix(panel, origin, features);
                auto lock = gate.enter();
                const auto wall0 = WallClock::now();
                const double cpu0 = thread_cpu_seconds();
                model = fit_family(family, matrix, hyper, run.rng_seed + k);
                run.fit_events.push_back(FitEvent{origin, wall_seconds_since(wall0),
                                                  thread_cpu_seconds() - cpu0,
                                                  static_cast<std::int64_t>(matrix.n_rows)});
                model->set_fitted_at(origin);
            } else {
                std::int64_t train_rows = 0;
                for (std::size_t i = 0; i < panel.n_series(); ++i) {
                    train_rows += origin - panel.start_offset(i) + 1;
                }
                auto lock = gate.enter();
                const auto wall0 = WallClock::now();
                const double cpu0 = thread_cpu_seconds();
                run.fit_events.push_back(FitEvent{origin, wall_seconds_since(wall0),
                                                  thread_cpu_seconds() - cpu0, train_rows});
            }
        }
        run.fitted_at_per_origin.push_back(uses_features ? model->fitted_at() : origin);

        auto lock = gate.enter();
        const auto wall0 = WallClock::now();
        const double cpu0 = thread_cpu_seconds();
        for (std::size_t i = 0; i < panel.n_series(); ++i) {
            if (uses_features) {
                RecursionContext context(panel, i, features, model->schema(), origin);
                for (int step = 1; step <= config.horizon; ++step) {
                    context.build_row(origin + step, row_buf);
                    const double raw_point = model->predict_point(row_buf);
                    model->predict_quantiles(row_buf, quantile_buf);
                    ForecastRecord record = finalize_forecast(
                        *model, static_cast<std::uint32_t>(i), origin, step, raw_point,
                        std::vector<double>(quantile_buf.begin(), quantile_buf.end()));
                    context.push_prediction(record.point);
                    run.forecasts.push_back(std::move(record));
                }
            } else {
                const std::vector<double> path =
                    seasonal_naive(panel, i, origin, config.horizon, config.season);
                for (int step = 1; step <= config.horizon; ++step) {
                    ForecastRecord record;
                    record.series = static_cast<std::uint32_t>(i);
                    record.origin = origin;
                    record.step = step;
                    record.point = path[static_cast<std::size_t>(step - 1)];
                    record.quantiles.assign(hyper.quantile_levels.size(), record.point);
                    run.forecasts.push_back(std::move(record));
                }
            }
        }
        run.predict_wall_seconds += wall_seconds_since(wall0);
        run.predict_cpu_seconds += thread_cpu_seconds() - cpu0;
    }

    const std::size_t expected_fits =
        (origins.size() + static_cast<std::size_t>(r) - 1) / static_cast<std::size_t>(r);
    if (run.fit_events.size() != expected_fits) {
        throw Error("internal schedule violation: " + std::to_string(run.fit_events.size()) +
                    " fits, expected " + std::to_string(expected_fits));
    }
    return run;
}

std::vector<BacktestRun> run_grid(const TimeSeriesPanel& panel,
                                  const std::vector<ModelFamily>& families,
                                  const FeatureConfig& features, const BacktestConfig& config,
                                  const ModelHyperparams& hyper, int jobs) {
    if (families.empty()) throw ConfigError("no model families selected");
    config.validate();

    struct Cell {
        ModelFamily family;
        int r;
    };
    std::vector<Cell> cells;
    for (ModelFamily family : families) {
        for (int r : config.retrain_set) cells.push_back(Cell{family, r});
    }

    std::vector<BacktestRun> runs(cells.size());
    TimingGate gate;
    std::atomic<std::size_t> next{0};

    auto worker = [&]() {
        while (true) {
            const std::size_t idx = next.fetch_add(1);
            if (idx >= cells.size()) break;
            const Cell& cell = cells[idx];
            try {
                runs[idx] =
                    run_backtest(panel, cell.family, features, config, cell.r, hyper, gate);
            } catch (const std::exception& e) {
                runs[idx].family = cell.family;
                runs[idx].r = cell.r;
                runs[idx].quantile_levels = hyper.quantile_levels;
                runs[idx].failed = true;
                runs[idx].error = e.what();
            }
        }
    };

    const int n_threads = std::max(1, jobs);
    if (n_threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(n_threads));
        for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
        for (auto& thread : pool) thread.join();
    }
    return runs;
}

}  // namespace retrainbench
