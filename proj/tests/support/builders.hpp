// Small panel/matrix builders shared by the test suites.
#pragma once

#include <string>
#include <vector>

#include "retrainbench/features.hpp"
#include "retrainbench/panel.hpp"

namespace builders {

using retrainbench::Frequency;
using retrainbench::TimeSeriesPanel;

/// Aligned panel from dense per-series value vectors (all starting at the
/// panel start), weekly by default, no statics or calendar.
inline TimeSeriesPanel make_panel(std::vector<std::vector<double>> values,
                                  Frequency f = Frequency::weekly) {
    const std::size_t n = values.front().size();
    std::vector<retrainbench::DayNumber> timestamps(n);
    const retrainbench::DayNumber start = retrainbench::days_from_civil(2019, 1, 7);
    const int step = retrainbench::frequency_step_days(f);
    for (std::size_t t = 0; t < n; ++t) {
        timestamps[t] = start + static_cast<retrainbench::DayNumber>(t) * step;
    }
    std::vector<std::string> ids;
    std::vector<int> offsets;
    for (std::size_t i = 0; i < values.size(); ++i) {
        ids.push_back("S" + std::to_string(i + 1));
        offsets.push_back(0);
    }
    return TimeSeriesPanel(f, std::move(timestamps), std::move(ids), std::move(offsets),
                           std::move(values));
}

/// Minimal lag-only feature config (no calendar, no expanding mean).
inline retrainbench::FeatureConfig lag_config(std::vector<int> lags,
                                              std::vector<int> rolling = {}) {
    retrainbench::FeatureConfig config;
    config.lags = std::move(lags);
    config.rolling_windows = std::move(rolling);
    config.use_expanding_mean = false;
    config.calendar_fields = {};
    return config;
}

}  // namespace builders
