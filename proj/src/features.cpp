#include "retrainbench/features.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <unordered_map>

#include "retrainbench/csv.hpp"
#include "retrainbench/errors.hpp"

namespace retrainbench {

const char* calendar_field_name(CalendarField f) {
    switch (f) {
        case CalendarField::year: return "year";
        case CalendarField::quarter: return "quarter";
        case CalendarField::month: return "month";
        case CalendarField::week: return "week";
        case CalendarField::dayofweek: return "dayofweek";
        case CalendarField::day: return "day";
    }
    return "?";
}

CalendarField calendar_field_from_name(const std::string& name) {
    for (CalendarField f : {CalendarField::year, CalendarField::quarter, CalendarField::month,
                            CalendarField::week, CalendarField::dayofweek, CalendarField::day}) {
        if (name == calendar_field_name(f)) return f;
    }
    throw ConfigError("unknown calendar field '" + name + "'");
}

const char* encoding_name(CategoryEncoding e) {
    return e == CategoryEncoding::one_hot ? "one_hot" : "ordinal";
}

CategoryEncoding encoding_from_name(const std::string& name) {
    if (name == "one_hot") return CategoryEncoding::one_hot;
    if (name == "ordinal") return CategoryEncoding::ordinal;
    throw ConfigError("unknown encoding '" + name + "' (expected one_hot or ordinal)");
}

const char* transform_name(TargetTransform t) {
    return t == TargetTransform::none ? "none" : "log1p";
}

TargetTransform transform_from_name(const std::string& name) {
    if (name == "none") return TargetTransform::none;
    if (name == "log1p") return TargetTransform::log1p;
    throw ConfigError("unknown target transform '" + name + "'");
}

double apply_transform(TargetTransform t, double y) {
    return t == TargetTransform::none ? y : std::log1p(y);
}

double invert_transform(TargetTransform t, double z) {
    return t == TargetTransform::none ? z : std::expm1(z);
}

FeatureConfig FeatureConfig::defaults_for(Frequency f) {
    FeatureConfig config;
    if (f == Frequency::daily) {
        config.lags = {1, 7, 14, 28};
        config.rolling_windows = {7, 28};
        config.calendar_fields = {CalendarField::year,  CalendarField::quarter,
                                  CalendarField::month, CalendarField::week,
                                  CalendarField::dayofweek, CalendarField::day};
    } else {
        config.lags = {1, 2, 4, 13, 52};
        config.rolling_windows = {4, 13};
        config.calendar_fields = {CalendarField::year, CalendarField::quarter,
                                  CalendarField::month, CalendarField::week};
    }
    return config;
}

int FeatureConfig::warm_up() const {
    int warm = use_expanding_mean ? 1 : 0;
    for (int l : lags) warm = std::max(warm, l);
    for (int w : rolling_windows) warm = std::max(warm, w);
    return warm;
}

void FeatureConfig::validate() const {
    if (lags.empty() && rolling_windows.empty() && !use_expanding_mean &&
        calendar_fields.empty()) {
        throw ConfigError("feature config selects no features");
    }
    for (std::size_t i = 0; i < lags.size(); ++i) {
        if (lags[i] < 1) throw ConfigError("lags must be positive");
        if (i > 0 && lags[i] <= lags[i - 1]) {
            throw ConfigError("lags must be sorted ascending and unique");
        }
    }
    for (std::size_t i = 0; i < rolling_windows.size(); ++i) {
        if (rolling_windows[i] < 1) throw ConfigError("rolling windows must be positive");
        if (i > 0 && rolling_windows[i] <= rolling_windows[i - 1]) {
            throw ConfigError("rolling windows must be sorted ascending and unique");
        }
    }
    std::set<CalendarField> seen(calendar_fields.begin(), calendar_fields.end());
    if (seen.size() != calendar_fields.size()) {
        throw ConfigError("calendar fields must be unique");
    }
}

namespace {

bool event_column_is_numeric(const TimeSeriesPanel& panel, std::size_t field) {
    double v;
    for (std::size_t t = 0; t < panel.n_timestamps(); ++t) {
        if (!parse_double(panel.calendar_value(static_cast<int>(t), field), v) ||
            !std::isfinite(v)) {
            return false;
        }
    }
    return true;
}

std::vector<std::string> sorted_unique(std::vector<std::string> values) {
    std::sort(values.begin(), values.end());
    values.erase(std::unique(values.begin(), values.end()), values.end());
    return values;
}

}  // namespace

FeatureSchema make_schema(const TimeSeriesPanel& panel, const FeatureConfig& config) {
    config.validate();
    FeatureSchema schema;
    schema.target_transform = config.target_transform;

    for (int l : config.lags) schema.columns.push_back("lag_" + std::to_string(l));
    for (int w : config.rolling_windows) schema.columns.push_back("rollmean_" + std::to_string(w));
    if (config.use_expanding_mean) schema.columns.push_back("expanding_mean");
    for (CalendarField f : {CalendarField::year, CalendarField::quarter, CalendarField::month,
                            CalendarField::week, CalendarField::dayofweek, CalendarField::day}) {
        if (std::find(config.calendar_fields.begin(), config.calendar_fields.end(), f) !=
            config.calendar_fields.end()) {
            schema.columns.push_back(std::string("cal_") + calendar_field_name(f));
        }
    }

    for (std::size_t a = 0; a < panel.static_names().size(); ++a) {
        std::vector<std::string> values;
        values.reserve(panel.n_series());
        for (std::size_t i = 0; i < panel.n_series(); ++i) values.push_back(panel.statics()[i][a]);
        schema.static_categories.push_back(sorted_unique(std::move(values)));
        const std::string& name = panel.static_names()[a];
        if (config.static_encoding == CategoryEncoding::one_hot) {
            for (const auto& cat : schema.static_categories.back()) {
                schema.columns.push_back("static_" + name + "=" + cat);
            }
        } else {
            schema.columns.push_back("static_" + name);
        }
    }

    for (std::size_t e = 0; e < panel.calendar_names().size(); ++e) {
        const std::string& name = panel.calendar_names()[e];
        if (event_column_is_numeric(panel, e)) {
            schema.event_categories.emplace_back();  // numeric passthrough
            schema.columns.push_back("event_" + name);
        } else {
            std::vector<std::string> values;
            values.reserve(panel.n_timestamps());
            for (std::size_t t = 0; t < panel.n_timestamps(); ++t) {
                values.push_back(panel.calendar_value(static_cast<int>(t), e));
            }
            schema.event_categories.push_back(sorted_unique(std::move(values)));
            if (config.event_encoding == CategoryEncoding::one_hot) {
                for (const auto& cat : schema.event_categories.back()) {
                    schema.columns.push_back("event_" + name + "=" + cat);
                }
            } else {
                schema.columns.push_back("event_" + name);
            }
        }
    }

    return schema;
}

namespace {

/// Pre-rendered per-timestamp and per-series column segments shared by the
/// training and prediction paths so both emit bit-identical rows.
struct SegmentRenderer {
    const TimeSeriesPanel& panel;
    const FeatureConfig& config;
    const FeatureSchema& schema;

    void append_calendar(int t, std::vector<double>& out) const {
        const DayNumber day = panel.timestamps()[static_cast<std::size_t>(t)];
        const CivilDate civil = civil_from_days(day);
        for (CalendarField f : {CalendarField::year, CalendarField::quarter, CalendarField::month,
                                CalendarField::week, CalendarField::dayofweek, CalendarField::day}) {
            if (std::find(config.calendar_fields.begin(), config.calendar_fields.end(), f) ==
                config.calendar_fields.end()) {
                continue;
            }
            switch (f) {
                case CalendarField::year: out.push_back(static_cast<double>(civil.year)); break;
                case CalendarField::quarter: out.push_back(static_cast<double>(quarter_of(civil.month))); break;
                case CalendarField::month: out.push_back(static_cast<double>(civil.month)); break;
                case CalendarField::week: out.push_back(static_cast<double>(week_of_year(day))); break;
                case CalendarField::dayofweek: out.push_back(static_cast<double>(weekday(day))); break;
                case CalendarField::day: out.push_back(static_cast<double>(civil.day)); break;
            }
        }
    }

    void append_statics(std::size_t series, std::vector<double>& out) const {
        for (std::size_t a = 0; a < schema.static_categories.size(); ++a) {
            const auto& cats = schema.static_categories[a];
            const std::string& value = panel.statics()[series][a];
            const auto it = std::lower_bound(cats.begin(), cats.end(), value);
            const auto rank = static_cast<std::size_t>(it - cats.begin());
            if (config.static_encoding == CategoryEncoding::one_hot) {
                for (std::size_t c = 0; c < cats.size(); ++c) {
                    out.push_back(c == rank && it != cats.end() && *it == value ? 1.0 : 0.0);
                }
            } else {
                out.push_back(static_cast<double>(rank));
            }
        }
    }

    void append_events(int t, std::vector<double>& out) const {
        for (std::size_t e = 0; e < schema.event_categories.size(); ++e) {
            const std::string& value = panel.calendar_value(t, e);
            const auto& cats = schema.event_categories[e];
            if (cats.empty()) {
                double v = 0.0;
                parse_double(value, v);
                out.push_back(v);
                continue;
            }
            const auto it = std::lower_bound(cats.begin(), cats.end(), value);
            const auto rank = static_cast<std::size_t>(it - cats.begin());
            if (config.event_encoding == CategoryEncoding::one_hot) {
                for (std::size_t c = 0; c < cats.size(); ++c) {
                    out.push_back(c == rank && it != cats.end() && *it == value ? 1.0 : 0.0);
                }
            } else {
                out.push_back(static_cast<double>(rank));
            }
        }
    }
};

/// Lag / rolling-mean / expanding-mean block at local position `pos` (0-based
/// within the series), given the running prefix sums of the transformed
/// series: prefix[k] = sum of z[0..k-1].
void append_target_history(const FeatureConfig& config, std::span<const double> z,
                           std::span<const double> prefix, std::size_t pos,
                           std::vector<double>& out) {
    for (int l : config.lags) out.push_back(z[pos - static_cast<std::size_t>(l)]);
    for (int w : config.rolling_windows) {
        const auto uw = static_cast<std::size_t>(w);
        out.push_back((prefix[pos] - prefix[pos - uw]) / static_cast<double>(w));
    }
    if (config.use_expanding_mean) {
        out.push_back(prefix[pos] / static_cast<double>(pos));
    }
}

std::vector<double> prefix_sums(std::span<const double> z) {
    std::vector<double> prefix(z.size() + 1, 0.0);
    for (std::size_t k = 0; k < z.size(); ++k) prefix[k + 1] = prefix[k] + z[k];
    return prefix;
}

}  // namespace

FeatureMatrix build_training_matrix(const TimeSeriesPanel& panel, int end_index,
                                    const FeatureConfig& config) {
    config.validate();
    if (end_index < 0 || end_index >= static_cast<int>(panel.n_timestamps())) {
        throw WindowTooShort("end_index " + std::to_string(end_index) + " outside panel range");
    }

    FeatureMatrix matrix;
    matrix.schema = make_schema(panel, config);
    matrix.n_cols = matrix.schema.n_columns();
    const int warm = config.warm_up();

    std::size_t total_rows = 0;
    for (std::size_t i = 0; i < panel.n_series(); ++i) {
        const int window_len = end_index - panel.start_offset(i) + 1;
        if (window_len > warm) total_rows += static_cast<std::size_t>(window_len - warm);
    }
    if (total_rows == 0) {
        throw WindowTooShort("training window shorter than the feature warm-up (" +
                             std::to_string(warm) + " observations)");
    }

    matrix.n_rows = total_rows;
    matrix.x.reserve(total_rows * matrix.n_cols);
    matrix.y.reserve(total_rows);
    matrix.series.reserve(total_rows);
    matrix.t_index.reserve(total_rows);

    const SegmentRenderer renderer{panel, config, matrix.schema};

    // Calendar and event segments depend only on the timestamp; render once.
    std::vector<std::vector<double>> time_segment(static_cast<std::size_t>(end_index) + 1);
    for (int t = 0; t <= end_index; ++t) {
        auto& seg = time_segment[static_cast<std::size_t>(t)];
        renderer.append_calendar(t, seg);
    }
    std::vector<std::vector<double>> event_segment(static_cast<std::size_t>(end_index) + 1);
    if (!matrix.schema.event_categories.empty()) {
        for (int t = 0; t <= end_index; ++t) {
            renderer.append_events(t, event_segment[static_cast<std::size_t>(t)]);
        }
    }

    std::vector<double> z;
    std::vector<double> static_seg;
    for (std::size_t i = 0; i < panel.n_series(); ++i) {
        const int offset = panel.start_offset(i);
        const int window_len = end_index - offset + 1;
        if (window_len <= warm) continue;

        z.assign(static_cast<std::size_t>(window_len), 0.0);
        for (int k = 0; k < window_len; ++k) {
            z[static_cast<std::size_t>(k)] =
                apply_transform(config.target_transform, panel.value_at(i, offset + k));
        }
        const std::vector<double> prefix = prefix_sums(z);

        static_seg.clear();
        renderer.append_statics(i, static_seg);

        for (int pos = warm; pos < window_len; ++pos) {
            const int t = offset + pos;
            append_target_history(config, z, prefix, static_cast<std::size_t>(pos), matrix.x);
            const auto& cal = time_segment[static_cast<std::size_t>(t)];
            matrix.x.insert(matrix.x.end(), cal.begin(), cal.end());
            matrix.x.insert(matrix.x.end(), static_seg.begin(), static_seg.end());
            const auto& ev = event_segment[static_cast<std::size_t>(t)];
            matrix.x.insert(matrix.x.end(), ev.begin(), ev.end());

            matrix.y.push_back(z[static_cast<std::size_t>(pos)]);
            matrix.series.push_back(static_cast<std::uint32_t>(i));
            matrix.t_index.push_back(t);
        }
    }
    return matrix;
}

RecursionContext::RecursionContext(const TimeSeriesPanel& panel, std::size_t series,
                                   const FeatureConfig& config, const FeatureSchema& schema,
                                   int origin_index)
    : panel_(panel), config_(config), schema_(schema), series_(series), origin_(origin_index) {
    const int offset = panel.start_offset(series);
    const int observed = origin_index - offset + 1;  // observations up to the origin
    if (observed < config.warm_up()) {
        throw WindowTooShort("series '" + panel.series_ids()[series] +
                             "' has fewer observations than the feature warm-up at the origin");
    }
    next_index_ = origin_index + 1;
    z_.resize(static_cast<std::size_t>(observed));
    for (int k = 0; k < observed; ++k) {
        z_[static_cast<std::size_t>(k)] =
            apply_transform(config.target_transform, panel.value_at(series, offset + k));
    }
    prefix_ = prefix_sums(z_);
    const SegmentRenderer renderer{panel_, config_, schema_};
    renderer.append_statics(series_, static_segment_);
}

void RecursionContext::build_row(int at_index, std::vector<double>& out) const {
    if (at_index != next_index_) {
        throw SuffixLengthMismatch("row requested for index " + std::to_string(at_index) +
                                   " but the recursion is at " + std::to_string(next_index_));
    }
    if (at_index >= static_cast<int>(panel_.n_timestamps())) {
        throw SuffixLengthMismatch("at_index outside the panel range");
    }
    out.clear();
    const auto pos = z_.size();
    append_target_history(config_, z_, prefix_, pos, out);
    const SegmentRenderer renderer{panel_, config_, schema_};
    renderer.append_calendar(at_index, out);
    out.insert(out.end(), static_segment_.begin(), static_segment_.end());
    renderer.append_events(at_index, out);
    if (out.size() != schema_.n_columns()) {
        throw SchemaMismatch("prediction row width does not match the schema");
    }
}

void RecursionContext::push_prediction(double value) {
    z_.push_back(apply_transform(config_.target_transform, value));
    prefix_.push_back(prefix_.back() + z_.back());
    ++next_index_;
}

std::vector<double> build_prediction_row(const TimeSeriesPanel& panel, std::size_t series,
                                         int at_index, const FeatureConfig& config,
                                         const FeatureSchema& schema, int origin_index,
                                         std::span<const double> predicted_suffix) {
    if (at_index <= origin_index) {
        throw SuffixLengthMismatch("at_index must lie beyond the forecast origin");
    }
    const int gap = at_index - origin_index - 1;
    if (gap != static_cast<int>(predicted_suffix.size())) {
        throw SuffixLengthMismatch("predicted suffix has " +
                                   std::to_string(predicted_suffix.size()) + " values, expected " +
                                   std::to_string(gap));
    }
    RecursionContext context(panel, series, config, schema, origin_index);
    for (double v : predicted_suffix) context.push_prediction(v);
    std::vector<double> row;
    context.build_row(at_index, row);
    return row;
}

void dump_feature_matrix_csv(const FeatureMatrix& matrix, const TimeSeriesPanel& panel,
                             const std::string& path) {
    std::ofstream out(path);
    if (!out) throw MalformedRow("cannot open for writing: " + path);
    out << "unique_id,ds,target";
    for (const auto& col : matrix.schema.columns) out << ',' << col;
    out << '\n';
    for (std::size_t r = 0; r < matrix.n_rows; ++r) {
        out << panel.series_ids()[matrix.series[r]] << ','
            << format_date(panel.timestamps()[static_cast<std::size_t>(matrix.t_index[r])]) << ','
            << format_double(matrix.y[r]);
        for (double v : matrix.row(r)) out << ',' << format_double(v);
        out << '\n';
    }
}

}  // namespace retrainbench
