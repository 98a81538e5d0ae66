#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "retrainbench/features.hpp"
#include "retrainbench/panel.hpp"

namespace retrainbench {

enum class ModelFamily { pooled_linear, gbt, mlp, seasonal_naive };

const char* family_name(ModelFamily f);
ModelFamily family_from_name(const std::string& name);
/// "ML" for pooled_linear/gbt, "DL" for mlp, "benchmark" for seasonal_naive.
const char* family_label(ModelFamily f);

/// The 14 probability levels used for probabilistic evaluation.
const std::vector<double>& default_quantile_levels();
/// Column suffix for a level: 0.05 -> "0.05", 0.1 -> "0.1", 0.005 -> "0.005".
std::string quantile_level_text(double level);

/// One h-step-ahead forecast for (series, origin, step). Values live on the
/// demand scale: non-negative, quantiles non-decreasing in level.
struct ForecastRecord {
    std::uint32_t series = 0;
    std::int32_t origin = -1;
    int step = 1;
    double point = 0.0;
    std::vector<double> quantiles;  // aligned with the model's quantile_levels
};

/// A fitted cross-series predictor. predict_* are pure and reentrant; row
/// layout must match schema().
class GlobalModel {
public:
    virtual ~GlobalModel() = default;

    virtual ModelFamily family() const = 0;
    virtual const FeatureSchema& schema() const = 0;
    virtual const std::vector<double>& quantile_levels() const = 0;

    /// Point prediction on the (possibly transformed) training target scale.
    virtual double predict_point(std::span<const double> row) const = 0;
    /// Quantile predictions on the training target scale, one per level.
    virtual void predict_quantiles(std::span<const double> row, std::span<double> out) const = 0;

    std::int32_t fitted_at() const { return fitted_at_; }
    void set_fitted_at(std::int32_t origin) { fitted_at_ = origin; }

    std::uint64_t rng_seed() const { return rng_seed_; }

protected:
    void check_row(std::span<const double> row) const;

    std::int32_t fitted_at_ = -1;
    std::uint64_t rng_seed_ = 0;
};

/// Turns raw model outputs into a finalized record: back-transforms, sorts
/// the quantiles (rearrangement) and clips negatives to zero.
ForecastRecord finalize_forecast(const GlobalModel& model, std::uint32_t series,
                                 std::int32_t origin, int step, double raw_point,
                                 std::vector<double> raw_quantiles);

/// One record per feature row: point + sorted/clipped quantiles.
ForecastRecord predict(const GlobalModel& model, std::span<const double> row,
                       std::uint32_t series, std::int32_t origin, int step);

/// Seasonal-naive benchmark: step k repeats the value s periods before
/// origin + k. Requires at least s observations up to the origin.
std::vector<double> seasonal_naive(const TimeSeriesPanel& panel, std::size_t series, int origin,
                                   int horizon, int season);

/// Versioned .rbmodel dump: JSON header + raw little-endian float64 block.
/// Round-trips bit-exactly. Layout documented in docs/model_format.md.
void save_model(const GlobalModel& model, const std::string& path);
std::unique_ptr<GlobalModel> load_model(const std::string& path);

}  // namespace retrainbench
