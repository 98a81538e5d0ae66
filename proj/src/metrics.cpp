#include "retrainbench/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "retrainbench/errors.hpp"

namespace retrainbench {

namespace {

double seasonal_naive_mse(std::span<const double> train, int season) {
    const auto n = static_cast<int>(train.size());
    if (n <= season) {
        throw ZeroDenominator("training history not longer than the seasonal period");
    }
    double acc = 0.0;
    for (int t = season; t < n; ++t) {
        const double d = train[static_cast<std::size_t>(t)] -
                         train[static_cast<std::size_t>(t - season)];
        acc += d * d;
    }
    return acc / static_cast<double>(n - season);
}

double seasonal_naive_mae(std::span<const double> train, int season) {
    const auto n = static_cast<int>(train.size());
    if (n <= season) {
        throw ZeroDenominator("training history not longer than the seasonal period");
    }
    double acc = 0.0;
    for (int t = season; t < n; ++t) {
        acc += std::abs(train[static_cast<std::size_t>(t)] -
                        train[static_cast<std::size_t>(t - season)]);
    }
    return acc / static_cast<double>(n - season);
}

double pinball(double y, double f, double q) {
    return y >= f ? q * (y - f) : (1.0 - q) * (f - y);
}

}  // namespace

double rmsse(std::span<const double> actuals, std::span<const double> forecasts,
             std::span<const double> train, int season) {
    if (actuals.size() != forecasts.size() || actuals.empty()) {
        throw IncompatibleRuns("actuals and forecasts must have equal non-zero length");
    }
    const double denom = seasonal_naive_mse(train, season);
    if (denom <= 0.0) {
        throw ZeroDenominator("seasonal-naive in-sample MSE is zero (constant history)");
    }
    double num = 0.0;
    for (std::size_t t = 0; t < actuals.size(); ++t) {
        const double d = actuals[t] - forecasts[t];
        num += d * d;
    }
    num /= static_cast<double>(actuals.size());
    return std::sqrt(num / denom);
}

double sql(std::span<const double> actuals, std::span<const double> quantile_forecasts, double q,
           std::span<const double> train, int season) {
    if (actuals.size() != quantile_forecasts.size() || actuals.empty()) {
        throw IncompatibleRuns("actuals and quantile forecasts must have equal non-zero length");
    }
    if (q <= 0.0 || q >= 1.0) throw MissingQuantile("quantile level must be in (0, 1)");
    const double denom = seasonal_naive_mae(train, season);
    if (denom <= 0.0) {
        throw ZeroDenominator("seasonal-naive in-sample MAE is zero (constant history)");
    }
    double num = 0.0;
    for (std::size_t t = 0; t < actuals.size(); ++t) {
        num += pinball(actuals[t], quantile_forecasts[t], q);
    }
    num /= static_cast<double>(actuals.size());
    return num / denom;
}

double smql(std::span<const double> actuals, std::span<const double> quantile_forecasts,
            std::span<const double> levels, std::span<const double> required_levels,
            std::span<const double> train, int season) {
    if (levels.size() != required_levels.size()) {
        throw MissingQuantile("forecast level set does not match the configured set");
    }
    for (std::size_t k = 0; k < levels.size(); ++k) {
        if (levels[k] != required_levels[k]) {
            throw MissingQuantile("missing quantile level " + std::to_string(required_levels[k]));
        }
    }
    if (quantile_forecasts.size() != actuals.size() * levels.size()) {
        throw MissingQuantile("quantile forecast block has the wrong shape");
    }
    const std::size_t h = actuals.size();
    std::vector<double> column(h);
    double acc = 0.0;
    for (std::size_t k = 0; k < levels.size(); ++k) {
        for (std::size_t t = 0; t < h; ++t) column[t] = quantile_forecasts[t * levels.size() + k];
        acc += sql(actuals, column, levels[k], train, season);
    }
    return acc / static_cast<double>(levels.size());
}

MetricFrame aggregate(const std::vector<BacktestRun>& runs, const TimeSeriesPanel& panel,
                      const BacktestConfig& config) {
    if (runs.empty()) throw IncompatibleRuns("no runs to aggregate");
    config.validate();

    MetricFrame frame;
    frame.retrain_set = config.retrain_set;
    frame.baseline_r = config.baseline_r;
    for (const auto& run : runs) {
        if (run.failed) continue;
        if (frame.quantile_levels.empty()) {
            frame.quantile_levels = run.quantile_levels;
        } else if (run.quantile_levels != frame.quantile_levels) {
            throw IncompatibleRuns("runs carry different quantile level sets");
        }
    }
    if (frame.quantile_levels.empty()) {
        throw IncompatibleRuns("no successful runs to aggregate");
    }

    const std::vector<int> origins = enumerate_origins(config, static_cast<int>(panel.n_timestamps()));
    const int h = config.horizon;
    const int season = config.season;

    // Scaling denominators depend only on the panel; compute once and exclude
    // any series with a degenerate denominator from every scenario.
    const std::size_t n_series = panel.n_series();
    const std::size_t n_origins = origins.size();
    std::vector<double> mse_denominator(n_series * n_origins, 0.0);
    std::vector<double> mae_denominator(n_series * n_origins, 0.0);
    std::vector<bool> excluded(n_series, false);
    for (std::size_t i = 0; i < n_series; ++i) {
        const int offset = panel.start_offset(i);
        for (std::size_t o = 0; o < n_origins; ++o) {
            const int origin = config.scale_from_first_origin ? origins.front() : origins[o];
            const int len = origin - offset + 1;
            if (len <= season) {
                excluded[i] = true;
                break;
            }
            std::span<const double> train(panel.series_values(i).data(),
                                          static_cast<std::size_t>(len));
            double mse = 0.0;
            double mae = 0.0;
            for (int t = season; t < len; ++t) {
                const double d = train[static_cast<std::size_t>(t)] -
                                 train[static_cast<std::size_t>(t - season)];
                mse += d * d;
                mae += std::abs(d);
            }
            mse /= static_cast<double>(len - season);
            mae /= static_cast<double>(len - season);
            if (mse <= 0.0 || mae <= 0.0) {
                excluded[i] = true;
                break;
            }
            mse_denominator[i * n_origins + o] = mse;
            mae_denominator[i * n_origins + o] = mae;
        }
    }
    for (std::size_t i = 0; i < n_series; ++i) {
        if (excluded[i]) frame.excluded_series.push_back(panel.series_ids()[i]);
    }

    const std::size_t n_levels = frame.quantile_levels.size();
    for (const auto& run : runs) {
        MetricAggregate agg;
        agg.family = run.family;
        agg.r = run.r;
        if (run.failed) {
            agg.failed = true;
            agg.error = run.error;
            agg.mean_rmsse = agg.mean_smql = std::nan("");
            agg.rel_rmsse = agg.rel_smql = agg.rel_ct = std::nan("");
            frame.aggregates.push_back(std::move(agg));
            continue;
        }
        if (run.forecasts.size() != n_origins * n_series * static_cast<std::size_t>(h)) {
            throw IncompatibleRuns("run does not cover the full (origin x series x step) grid");
        }

        // Forecasts arrive origin-major, series-minor, step-innermost.
        std::vector<double> series_rmsse(n_series, 0.0);
        std::vector<double> series_smql(n_series, 0.0);
        std::vector<double> series_sql(n_series * n_levels, 0.0);

        std::size_t cursor = 0;
        std::vector<double> actuals(static_cast<std::size_t>(h));
        std::vector<double> points(static_cast<std::size_t>(h));
        for (std::size_t o = 0; o < n_origins; ++o) {
            const int origin = origins[o];
            for (std::size_t i = 0; i < n_series; ++i) {
                const std::size_t base = cursor;
                cursor += static_cast<std::size_t>(h);
                if (excluded[i]) continue;

                for (int step = 1; step <= h; ++step) {
                    const ForecastRecord& record = run.forecasts[base + static_cast<std::size_t>(step - 1)];
                    if (record.series != i || record.origin != origin || record.step != step) {
                        throw IncompatibleRuns("forecast records out of order");
                    }
                    actuals[static_cast<std::size_t>(step - 1)] = panel.value_at(i, origin + step);
                    points[static_cast<std::size_t>(step - 1)] = record.point;
                }

                const double mse_den = mse_denominator[i * n_origins + o];
                const double mae_den = mae_denominator[i * n_origins + o];
                double sq_err = 0.0;
                for (int t = 0; t < h; ++t) {
                    const double d = actuals[static_cast<std::size_t>(t)] -
                                     points[static_cast<std::size_t>(t)];
                    sq_err += d * d;
                }
                sq_err /= static_cast<double>(h);

                MetricRow row;
                row.family = run.family;
                row.r = run.r;
                row.series = static_cast<std::uint32_t>(i);
                row.origin = origin;
                row.rmsse = std::sqrt(sq_err / mse_den);
                row.sql.resize(n_levels);
                series_rmsse[i] += row.rmsse;

                double smql_acc = 0.0;
                for (std::size_t k = 0; k < n_levels; ++k) {
                    const double q = frame.quantile_levels[k];
                    double pin = 0.0;
                    for (int t = 0; t < h; ++t) {
                        const ForecastRecord& record =
                            run.forecasts[base + static_cast<std::size_t>(t)];
                        pin += pinball(actuals[static_cast<std::size_t>(t)], record.quantiles[k], q);
                    }
                    pin /= static_cast<double>(h);
                    const double scaled = pin / mae_den;
                    row.sql[k] = scaled;
                    series_sql[i * n_levels + k] += scaled;
                    smql_acc += scaled;
                }
                row.smql = smql_acc / static_cast<double>(n_levels);
                series_smql[i] += row.smql;
                frame.rows.push_back(std::move(row));
            }
        }

        const double inv_origins = 1.0 / static_cast<double>(n_origins);
        double total_rmsse = 0.0;
        double total_smql = 0.0;
        std::size_t n_included = 0;
        for (std::size_t i = 0; i < n_series; ++i) {
            if (excluded[i]) continue;
            SeriesMetrics detail;
            detail.family = run.family;
            detail.r = run.r;
            detail.series = static_cast<std::uint32_t>(i);
            detail.rmsse = series_rmsse[i] * inv_origins;
            detail.smql = series_smql[i] * inv_origins;
            detail.sql.resize(n_levels);
            for (std::size_t k = 0; k < n_levels; ++k) {
                detail.sql[k] = series_sql[i * n_levels + k] * inv_origins;
            }
            total_rmsse += detail.rmsse;
            total_smql += detail.smql;
            ++n_included;
            frame.series_detail.push_back(std::move(detail));
        }
        if (n_included == 0) throw ZeroDenominator("every series was excluded from evaluation");

        agg.mean_rmsse = total_rmsse / static_cast<double>(n_included);
        agg.mean_smql = total_smql / static_cast<double>(n_included);
        agg.ct_wall_seconds = run.ct_wall_seconds();
        agg.ct_cpu_seconds = run.ct_cpu_seconds();
        agg.n_series = n_included;
        agg.n_excluded = frame.excluded_series.size();
        frame.aggregates.push_back(std::move(agg));
    }

    // Relative-to-baseline normalization per family.
    for (auto& agg : frame.aggregates) {
        if (agg.failed) continue;
        const MetricAggregate* baseline = nullptr;
        for (const auto& other : frame.aggregates) {
            if (other.family == agg.family && other.r == frame.baseline_r && !other.failed) {
                baseline = &other;
                break;
            }
        }
        if (baseline == nullptr) {
            agg.rel_rmsse = agg.rel_smql = agg.rel_ct = std::nan("");
            continue;
        }
        agg.rel_rmsse = agg.mean_rmsse / baseline->mean_rmsse;
        agg.rel_smql = agg.mean_smql / baseline->mean_smql;
        agg.rel_ct = agg.ct_wall_seconds / baseline->ct_wall_seconds;
    }
    return frame;
}

}  // namespace retrainbench
