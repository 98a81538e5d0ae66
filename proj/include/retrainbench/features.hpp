#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "retrainbench/panel.hpp"

namespace retrainbench {

enum class CalendarField { year, quarter, month, week, dayofweek, day };
enum class CategoryEncoding { one_hot, ordinal };
enum class TargetTransform { none, log1p };

const char* calendar_field_name(CalendarField f);
CalendarField calendar_field_from_name(const std::string& name);
const char* encoding_name(CategoryEncoding e);
CategoryEncoding encoding_from_name(const std::string& name);
const char* transform_name(TargetTransform t);
TargetTransform transform_from_name(const std::string& name);

double apply_transform(TargetTransform t, double y);
double invert_transform(TargetTransform t, double z);

struct FeatureConfig {
    std::vector<int> lags;
    std::vector<int> rolling_windows;  // means over the lag-1-shifted series
    bool use_expanding_mean = true;
    std::vector<CalendarField> calendar_fields;
    CategoryEncoding static_encoding = CategoryEncoding::one_hot;
    CategoryEncoding event_encoding = CategoryEncoding::one_hot;
    TargetTransform target_transform = TargetTransform::none;

    static FeatureConfig defaults_for(Frequency f);

    /// Observations consumed before the first usable row.
    int warm_up() const;
    void validate() const;
};

/// Frozen column layout plus the category dictionaries needed to rebuild the
/// exact same encoding at prediction time. A fitted model only accepts rows
/// built against an equal schema.
struct FeatureSchema {
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> static_categories;  // per static attribute
    std::vector<std::vector<std::string>> event_categories;   // per event column; empty => numeric
    TargetTransform target_transform = TargetTransform::none;

    std::size_t n_columns() const { return columns.size(); }
    bool operator==(const FeatureSchema& other) const = default;
};

/// Builds the schema implied by (panel, config). Category dictionaries come
/// from the panel's static table and full calendar (both known in advance),
/// so the layout does not depend on the training window.
FeatureSchema make_schema(const TimeSeriesPanel& panel, const FeatureConfig& config);

struct FeatureMatrix {
    FeatureSchema schema;
    std::size_t n_rows = 0;
    std::size_t n_cols = 0;
    std::vector<double> x;                // row-major
    std::vector<double> y;                // target on the (possibly transformed) scale
    std::vector<std::uint32_t> series;    // group key per row
    std::vector<std::int32_t> t_index;    // global timestamp index per row

    std::span<const double> row(std::size_t r) const {
        return {x.data() + r * n_cols, n_cols};
    }
};

/// Supervised view of all data up to and including `end_index`. Every feature
/// of a row at time t is computed from information at or before t-1 (calendar
/// and statics are known covariates). Rows inside the warm-up prefix are
/// dropped. Throws WindowTooShort when no row survives.
FeatureMatrix build_training_matrix(const TimeSeriesPanel& panel, int end_index,
                                    const FeatureConfig& config);

/// Recursive multi-step feature view of one series: observed data up to the
/// forecast origin plus point predictions appended one step at a time. Rows
/// are bit-identical to what build_training_matrix would emit if the
/// predictions were observed data.
class RecursionContext {
public:
    RecursionContext(const TimeSeriesPanel& panel, std::size_t series, const FeatureConfig& config,
                     const FeatureSchema& schema, int origin_index);

    /// Next index a row can be built for: origin + #pushed predictions + 1.
    int next_index() const { return next_index_; }

    /// Builds the feature row for `at_index`, which must equal next_index().
    void build_row(int at_index, std::vector<double>& out) const;

    /// Appends a point prediction (original scale) as if observed.
    void push_prediction(double value);

private:
    const TimeSeriesPanel& panel_;
    const FeatureConfig& config_;
    const FeatureSchema& schema_;
    std::size_t series_;
    int origin_;
    int next_index_;
    std::vector<double> z_;       // transformed history + pushed predictions
    std::vector<double> prefix_;  // prefix sums of z_
    std::vector<double> static_segment_;
};

/// Feature row for (series, at_index) where observed data stops at
/// `origin_index` and `predicted_suffix` stands in for origin_index+1 ..
/// at_index-1 (original scale). Produces exactly the row
/// build_training_matrix would emit if the suffix were observed.
std::vector<double> build_prediction_row(const TimeSeriesPanel& panel, std::size_t series,
                                         int at_index, const FeatureConfig& config,
                                         const FeatureSchema& schema, int origin_index,
                                         std::span<const double> predicted_suffix);

void dump_feature_matrix_csv(const FeatureMatrix& matrix, const TimeSeriesPanel& panel,
                             const std::string& path);

}  // namespace retrainbench
