#include "retrainbench/models.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>

#include "retrainbench/errors.hpp"

namespace retrainbench {

const char* family_name(ModelFamily f) {
    switch (f) {
        case ModelFamily::pooled_linear: return "pooled_linear";
        case ModelFamily::gbt: return "gbt";
        case ModelFamily::mlp: return "mlp";
        case ModelFamily::seasonal_naive: return "seasonal_naive";
    }
    return "?";
}

ModelFamily family_from_name(const std::string& name) {
    for (ModelFamily f : {ModelFamily::pooled_linear, ModelFamily::gbt, ModelFamily::mlp,
                          ModelFamily::seasonal_naive}) {
        if (name == family_name(f)) return f;
    }
    throw ConfigError("unknown model family '" + name + "'");
}

const char* family_label(ModelFamily f) {
    switch (f) {
        case ModelFamily::pooled_linear:
        case ModelFamily::gbt: return "ML";
        case ModelFamily::mlp: return "DL";
        case ModelFamily::seasonal_naive: return "benchmark";
    }
    return "?";
}

const std::vector<double>& default_quantile_levels() {
    static const std::vector<double> levels = {0.005, 0.025, 0.05, 0.1,   0.15,  0.2,   0.25,
                                               0.75,  0.8,   0.85, 0.9,   0.95,  0.975, 0.995};
    return levels;
}

std::string quantile_level_text(double level) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), level);
    return ec == std::errc() ? std::string(buf, ptr) : std::string("?");
}

void GlobalModel::check_row(std::span<const double> row) const {
    if (row.size() != schema().n_columns()) {
        throw SchemaMismatch("feature row has " + std::to_string(row.size()) +
                             " columns, model expects " + std::to_string(schema().n_columns()));
    }
}

ForecastRecord finalize_forecast(const GlobalModel& model, std::uint32_t series,
                                 std::int32_t origin, int step, double raw_point,
                                 std::vector<double> raw_quantiles) {
    const TargetTransform transform = model.schema().target_transform;
    ForecastRecord record;
    record.series = series;
    record.origin = origin;
    record.step = step;
    record.point = std::max(0.0, invert_transform(transform, raw_point));
    record.quantiles = std::move(raw_quantiles);
    for (double& v : record.quantiles) v = invert_transform(transform, v);
    std::sort(record.quantiles.begin(), record.quantiles.end());
    for (double& v : record.quantiles) v = std::max(0.0, v);
    if (!std::isfinite(record.point)) {
        throw DivergedTraining("non-finite point forecast");
    }
    for (double v : record.quantiles) {
        if (!std::isfinite(v)) throw DivergedTraining("non-finite quantile forecast");
    }
    return record;
}

ForecastRecord predict(const GlobalModel& model, std::span<const double> row,
                       std::uint32_t series, std::int32_t origin, int step) {
    const double raw_point = model.predict_point(row);
    std::vector<double> raw_quantiles(model.quantile_levels().size());
    model.predict_quantiles(row, raw_quantiles);
    return finalize_forecast(model, series, origin, step, raw_point, std::move(raw_quantiles));
}

std::vector<double> seasonal_naive(const TimeSeriesPanel& panel, std::size_t series, int origin,
                                   int horizon, int season) {
    if (season < 1) throw HistoryTooShort("seasonal period must be positive");
    const int offset = panel.start_offset(series);
    if (origin - season + 1 < offset) {
        throw HistoryTooShort("series '" + panel.series_ids()[series] + "' has fewer than " +
                              std::to_string(season) + " observations before the origin");
    }
    std::vector<double> forecast(static_cast<std::size_t>(horizon));
    for (int k = 1; k <= horizon; ++k) {
        const int t = origin - season + ((k - 1) % season) + 1;
        forecast[static_cast<std::size_t>(k - 1)] = panel.value_at(series, t);
    }
    return forecast;
}

}  // namespace retrainbench
