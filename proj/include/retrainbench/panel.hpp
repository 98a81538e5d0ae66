#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "retrainbench/dates.hpp"

namespace retrainbench {

enum class Frequency { daily, weekly };

/// Seasonal period of the calendar grid (7 for daily, 52 for weekly).
int frequency_period(Frequency f);
/// Grid spacing in days (1 for daily, 7 for weekly).
int frequency_step_days(Frequency f);
const char* frequency_name(Frequency f);
Frequency frequency_from_name(const std::string& name);

/// Minimum usable history per frequency: two years of daily data or three
/// years of weekly data.
constexpr int kMinObsDaily = 730;
constexpr int kMinObsWeekly = 157;
int default_min_obs(Frequency f);

/// Aligned multi-series demand panel. All series share one equally spaced
/// timestamp index and end at its last entry; a series may begin later than
/// the panel start (pre-launch history simply absent). Values are finite and
/// non-negative. Immutable after construction.
class TimeSeriesPanel {
public:
    TimeSeriesPanel(Frequency frequency,
                    std::vector<DayNumber> timestamps,
                    std::vector<std::string> series_ids,
                    std::vector<int> start_offsets,
                    std::vector<std::vector<double>> values,
                    std::vector<std::string> static_names = {},
                    std::vector<std::vector<std::string>> statics = {},
                    std::vector<std::string> calendar_names = {},
                    std::vector<std::vector<std::string>> calendar = {});

    Frequency frequency() const { return frequency_; }
    int period() const { return frequency_period(frequency_); }

    std::size_t n_series() const { return series_ids_.size(); }
    std::size_t n_timestamps() const { return timestamps_.size(); }

    const std::vector<DayNumber>& timestamps() const { return timestamps_; }
    const std::vector<std::string>& series_ids() const { return series_ids_; }

    /// First global timestamp index at which series i has data.
    int start_offset(std::size_t i) const { return start_offsets_[i]; }
    /// Number of observations of series i.
    int series_length(std::size_t i) const {
        return static_cast<int>(timestamps_.size()) - start_offsets_[i];
    }
    /// Value of series i at global timestamp index t (t >= start_offset(i)).
    double value_at(std::size_t i, int t) const {
        return values_[i][static_cast<std::size_t>(t - start_offsets_[i])];
    }
    const std::vector<double>& series_values(std::size_t i) const { return values_[i]; }

    const std::vector<std::string>& static_names() const { return static_names_; }
    const std::vector<std::vector<std::string>>& statics() const { return statics_; }
    const std::string& static_value(std::size_t series, std::size_t attr) const {
        return statics_[series][attr];
    }

    const std::vector<std::string>& calendar_names() const { return calendar_names_; }
    const std::vector<std::vector<std::string>>& calendar() const { return calendar_; }
    const std::string& calendar_value(int t, std::size_t field) const {
        return calendar_[static_cast<std::size_t>(t)][field];
    }

    bool operator==(const TimeSeriesPanel& other) const;

private:
    void validate() const;

    Frequency frequency_;
    std::vector<DayNumber> timestamps_;
    std::vector<std::string> series_ids_;
    std::vector<int> start_offsets_;
    std::vector<std::vector<double>> values_;
    std::vector<std::string> static_names_;
    std::vector<std::vector<std::string>> statics_;   // [series][attr]
    std::vector<std::string> calendar_names_;
    std::vector<std::vector<std::string>> calendar_;  // [timestamp][field]
};

/// Reads a long-format demand CSV (`unique_id,ds,y`) plus optional statics
/// (`unique_id,<attr>...`) and calendar (`ds,<event>...`) files into a
/// validated panel.
TimeSeriesPanel ingest_csv(const std::string& demand_path,
                           const std::optional<std::string>& statics_path,
                           const std::optional<std::string>& calendar_path,
                           Frequency frequency);

/// Keeps exactly the series with at least `min_obs` observations; the common
/// timestamp index is retained. Throws EmptyPanel if nothing survives.
TimeSeriesPanel filter_min_length(const TimeSeriesPanel& panel, int min_obs);

/// Zero-inflated negative-binomial demand generator. `base_rate` is the mean
/// of the count component; per-series rates are drawn uniformly from
/// base_rate * [1 - rate_spread, 1 + rate_spread]. Identical seeds produce
/// bit-identical panels.
struct SyntheticSpec {
    int n_series = 20;
    int length = 260;
    Frequency frequency = Frequency::weekly;
    double base_rate = 5.0;
    double rate_spread = 0.0;            // in [0, 1)
    double seasonality_amplitude = 0.0;  // in [0, 1]
    double zero_inflation = 0.0;         // in [0, 1)
    double trend_slope = 0.0;            // per-period relative drift
    double dispersion = 1.0;             // negative-binomial size k (> 0)
    std::uint64_t rng_seed = 0;
    std::string start_date = "";         // defaults to a Monday anchor per frequency

    void validate() const;
};

TimeSeriesPanel generate_synthetic(const SyntheticSpec& spec);

void write_demand_csv(const TimeSeriesPanel& panel, const std::string& path);
void write_statics_csv(const TimeSeriesPanel& panel, const std::string& path);
void write_calendar_csv(const TimeSeriesPanel& panel, const std::string& path);

}  // namespace retrainbench
