#include "retrainbench/panel.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <random>
#include <unordered_map>
#include <unordered_set>

#include "retrainbench/csv.hpp"
#include "retrainbench/errors.hpp"

namespace retrainbench {

int frequency_period(Frequency f) { return f == Frequency::daily ? 7 : 52; }
int frequency_step_days(Frequency f) { return f == Frequency::daily ? 1 : 7; }

const char* frequency_name(Frequency f) { return f == Frequency::daily ? "daily" : "weekly"; }

Frequency frequency_from_name(const std::string& name) {
    if (name == "daily") return Frequency::daily;
    if (name == "weekly") return Frequency::weekly;
    throw ConfigError("unknown frequency '" + name + "' (expected daily or weekly)");
}

int default_min_obs(Frequency f) { return f == Frequency::daily ? kMinObsDaily : kMinObsWeekly; }

TimeSeriesPanel::TimeSeriesPanel(Frequency frequency,
                                 std::vector<DayNumber> timestamps,
                                 std::vector<std::string> series_ids,
                                 std::vector<int> start_offsets,
                                 std::vector<std::vector<double>> values,
                                 std::vector<std::string> static_names,
                                 std::vector<std::vector<std::string>> statics,
                                 std::vector<std::string> calendar_names,
                                 std::vector<std::vector<std::string>> calendar)
    : frequency_(frequency),
      timestamps_(std::move(timestamps)),
      series_ids_(std::move(series_ids)),
      start_offsets_(std::move(start_offsets)),
      values_(std::move(values)),
      static_names_(std::move(static_names)),
      statics_(std::move(statics)),
      calendar_names_(std::move(calendar_names)),
      calendar_(std::move(calendar)) {
    validate();
}

void TimeSeriesPanel::validate() const {
    if (series_ids_.empty()) throw EmptyPanel("panel has no series");
    if (timestamps_.empty()) throw EmptyPanel("panel has no timestamps");
    if (series_ids_.size() != values_.size() || series_ids_.size() != start_offsets_.size()) {
        throw MisalignedPanel("series metadata sizes disagree");
    }
    const int step = frequency_step_days(frequency_);
    for (std::size_t t = 1; t < timestamps_.size(); ++t) {
        const DayNumber diff = timestamps_[t] - timestamps_[t - 1];
        if (diff <= 0) throw MisalignedPanel("timestamp index not strictly increasing");
        if (diff != step) {
            throw FrequencyMismatch("timestamp spacing " + std::to_string(diff) +
                                    " days does not match " + frequency_name(frequency_) + " grid");
        }
    }
    std::unordered_set<std::string> seen;
    for (std::size_t i = 0; i < series_ids_.size(); ++i) {
        if (!seen.insert(series_ids_[i]).second) {
            throw MisalignedPanel("duplicate series id '" + series_ids_[i] + "'");
        }
        const int offset = start_offsets_[i];
        if (offset < 0 || offset >= static_cast<int>(timestamps_.size())) {
            throw MisalignedPanel("series '" + series_ids_[i] + "' has invalid start offset");
        }
        if (values_[i].size() != timestamps_.size() - static_cast<std::size_t>(offset)) {
            throw MisalignedPanel("series '" + series_ids_[i] +
                                  "' does not span the index up to the panel end");
        }
        for (double v : values_[i]) {
            if (!std::isfinite(v)) {
                throw MalformedRow("series '" + series_ids_[i] + "' contains a non-finite value");
            }
            if (v < 0.0) {
                throw NegativeDemand("series '" + series_ids_[i] + "' contains negative demand");
            }
        }
    }
    if (!static_names_.empty()) {
        if (statics_.size() != series_ids_.size()) {
            throw MisalignedPanel("statics do not cover every series");
        }
        for (const auto& row : statics_) {
            if (row.size() != static_names_.size()) {
                throw MisalignedPanel("static attribute row width mismatch");
            }
        }
    }
    if (!calendar_names_.empty()) {
        if (calendar_.size() != timestamps_.size()) {
            throw MisalignedPanel("calendar covariates do not cover every timestamp");
        }
        for (const auto& row : calendar_) {
            if (row.size() != calendar_names_.size()) {
                throw MisalignedPanel("calendar covariate row width mismatch");
            }
        }
    }
}

bool TimeSeriesPanel::operator==(const TimeSeriesPanel& other) const {
    return frequency_ == other.frequency_ && timestamps_ == other.timestamps_ &&
           series_ids_ == other.series_ids_ && start_offsets_ == other.start_offsets_ &&
           values_ == other.values_ && static_names_ == other.static_names_ &&
           statics_ == other.statics_ && calendar_names_ == other.calendar_names_ &&
           calendar_ == other.calendar_;
}

namespace {

struct SeriesAccumulator {
    std::vector<std::pair<DayNumber, double>> points;
};

}  // namespace

TimeSeriesPanel ingest_csv(const std::string& demand_path,
                           const std::optional<std::string>& statics_path,
                           const std::optional<std::string>& calendar_path,
                           Frequency frequency) {
    const CsvTable demand = read_csv(demand_path);
    if (demand.header != std::vector<std::string>{"unique_id", "ds", "y"}) {
        throw MalformedRow("demand file header must be exactly 'unique_id,ds,y'");
    }

    std::vector<std::string> id_order;
    std::unordered_map<std::string, SeriesAccumulator> by_id;
    for (std::size_t i = 0; i < demand.rows.size(); ++i) {
        const auto& row = demand.rows[i];
        const std::size_t line = demand.line_numbers[i];
        if (row.size() != 3) {
            throw MalformedRow("line " + std::to_string(line) + ": expected 3 fields, got " +
                               std::to_string(row.size()));
        }
        if (row[0].empty()) {
            throw MalformedRow("line " + std::to_string(line) + ": empty unique_id");
        }
        DayNumber ds;
        try {
            ds = parse_date(row[1]);
        } catch (const MalformedRow& e) {
            throw MalformedRow("line " + std::to_string(line) + ": " + e.what());
        }
        double y;
        if (!parse_double(row[2], y) || !std::isfinite(y)) {
            throw MalformedRow("line " + std::to_string(line) + ": unparseable demand value '" +
                               row[2] + "'");
        }
        if (y < 0.0) {
            throw NegativeDemand("line " + std::to_string(line) + ": negative demand for series '" +
                                 row[0] + "'");
        }
        auto [it, inserted] = by_id.try_emplace(row[0]);
        if (inserted) id_order.push_back(row[0]);
        it->second.points.emplace_back(ds, y);
    }
    if (id_order.empty()) throw EmptyPanel("demand file contains no rows");

    const int step = frequency_step_days(frequency);
    DayNumber grid_start = by_id[id_order.front()].points.front().first;
    DayNumber grid_end = grid_start;
    for (auto& [id, acc] : by_id) {
        std::sort(acc.points.begin(), acc.points.end());
        grid_start = std::min(grid_start, acc.points.front().first);
        grid_end = std::max(grid_end, acc.points.back().first);
    }

    std::vector<DayNumber> timestamps;
    timestamps.reserve(static_cast<std::size_t>((grid_end - grid_start) / step) + 1);
    for (DayNumber d = grid_start; d <= grid_end; d += step) timestamps.push_back(d);

    std::vector<int> offsets;
    std::vector<std::vector<double>> values;
    offsets.reserve(id_order.size());
    values.reserve(id_order.size());
    for (const auto& id : id_order) {
        const auto& pts = by_id[id].points;
        const DayNumber first = pts.front().first;
        if ((first - grid_start) % step != 0) {
            throw FrequencyMismatch("series '" + id + "' starts off the " +
                                    std::string(frequency_name(frequency)) + " grid");
        }
        for (std::size_t k = 1; k < pts.size(); ++k) {
            const DayNumber diff = pts[k].first - pts[k - 1].first;
            if (diff == 0) {
                throw MisalignedPanel("series '" + id + "' has duplicate timestamp " +
                                      format_date(pts[k].first));
            }
            if (diff != step) {
                if (diff % step == 0) {
                    throw MisalignedPanel("series '" + id + "' is missing " +
                                          std::to_string(diff / step - 1) + " period(s) before " +
                                          format_date(pts[k].first));
                }
                throw FrequencyMismatch("series '" + id + "' spacing " + std::to_string(diff) +
                                        " days does not match the " + frequency_name(frequency) +
                                        " grid");
            }
        }
        if (pts.back().first != grid_end) {
            throw MisalignedPanel("series '" + id + "' ends at " + format_date(pts.back().first) +
                                  " before the panel end " + format_date(grid_end));
        }
        offsets.push_back(static_cast<int>((first - grid_start) / step));
        std::vector<double> v;
        v.reserve(pts.size());
        for (const auto& [d, y] : pts) v.push_back(y);
        values.push_back(std::move(v));
    }

    std::vector<std::string> static_names;
    std::vector<std::vector<std::string>> statics;
    if (statics_path) {
        const CsvTable table = read_csv(*statics_path);
        if (table.header.size() < 2 || table.header[0] != "unique_id") {
            throw MalformedRow("statics file header must start with 'unique_id'");
        }
        static_names.assign(table.header.begin() + 1, table.header.end());
        std::unordered_map<std::string, std::vector<std::string>> rows_by_id;
        for (std::size_t i = 0; i < table.rows.size(); ++i) {
            const auto& row = table.rows[i];
            if (row.size() != table.header.size()) {
                throw MalformedRow("statics line " + std::to_string(table.line_numbers[i]) +
                                   ": field count mismatch");
            }
            if (!by_id.count(row[0])) {
                throw MalformedRow("statics line " + std::to_string(table.line_numbers[i]) +
                                   ": series '" + row[0] + "' does not appear in the demand file");
            }
            rows_by_id[row[0]] = std::vector<std::string>(row.begin() + 1, row.end());
        }
        statics.reserve(id_order.size());
        for (const auto& id : id_order) {
            auto it = rows_by_id.find(id);
            if (it == rows_by_id.end()) {
                throw MalformedRow("statics file has no row for series '" + id + "'");
            }
            statics.push_back(it->second);
        }
    }

    std::vector<std::string> calendar_names;
    std::vector<std::vector<std::string>> calendar;
    if (calendar_path) {
        const CsvTable table = read_csv(*calendar_path);
        if (table.header.size() < 2 || table.header[0] != "ds") {
            throw MalformedRow("calendar file header must start with 'ds'");
        }
        calendar_names.assign(table.header.begin() + 1, table.header.end());
        std::map<DayNumber, std::vector<std::string>> rows_by_ds;
        for (std::size_t i = 0; i < table.rows.size(); ++i) {
            const auto& row = table.rows[i];
            if (row.size() != table.header.size()) {
                throw MalformedRow("calendar line " + std::to_string(table.line_numbers[i]) +
                                   ": field count mismatch");
            }
            DayNumber ds;
            try {
                ds = parse_date(row[0]);
            } catch (const MalformedRow& e) {
                throw MalformedRow("calendar line " + std::to_string(table.line_numbers[i]) + ": " +
                                   e.what());
            }
            rows_by_ds[ds] = std::vector<std::string>(row.begin() + 1, row.end());
        }
        calendar.reserve(timestamps.size());
        for (DayNumber d : timestamps) {
            auto it = rows_by_ds.find(d);
            if (it == rows_by_ds.end()) {
                throw MisalignedPanel("calendar file does not cover timestamp " + format_date(d));
            }
            calendar.push_back(it->second);
        }
    }

    return TimeSeriesPanel(frequency, std::move(timestamps), std::move(id_order),
                           std::move(offsets), std::move(values), std::move(static_names),
                           std::move(statics), std::move(calendar_names), std::move(calendar));
}

TimeSeriesPanel filter_min_length(const TimeSeriesPanel& panel, int min_obs) {
    if (min_obs < 1) throw InvalidSpec("min_obs must be >= 1");
    std::vector<std::string> ids;
    std::vector<int> offsets;
    std::vector<std::vector<double>> values;
    std::vector<std::vector<std::string>> statics;
    for (std::size_t i = 0; i < panel.n_series(); ++i) {
        if (panel.series_length(i) < min_obs) continue;
        ids.push_back(panel.series_ids()[i]);
        offsets.push_back(panel.start_offset(i));
        values.push_back(panel.series_values(i));
        if (!panel.static_names().empty()) statics.push_back(panel.statics()[i]);
    }
    if (ids.empty()) {
        throw EmptyPanel("no series has at least " + std::to_string(min_obs) + " observations");
    }
    return TimeSeriesPanel(panel.frequency(), panel.timestamps(), std::move(ids),
                           std::move(offsets), std::move(values), panel.static_names(),
                           std::move(statics), panel.calendar_names(), panel.calendar());
}

void SyntheticSpec::validate() const {
    if (n_series < 1) throw InvalidSpec("n_series must be positive");
    if (length < 1) throw InvalidSpec("length must be positive");
    if (base_rate <= 0.0) throw InvalidSpec("base_rate must be positive");
    if (rate_spread < 0.0 || rate_spread >= 1.0) throw InvalidSpec("rate_spread must be in [0, 1)");
    if (seasonality_amplitude < 0.0 || seasonality_amplitude > 1.0) {
        throw InvalidSpec("seasonality_amplitude must be in [0, 1]");
    }
    if (zero_inflation < 0.0 || zero_inflation >= 1.0) {
        throw InvalidSpec("zero_inflation must be in [0, 1)");
    }
    if (dispersion <= 0.0) throw InvalidSpec("dispersion must be positive");
    if (!start_date.empty()) parse_date(start_date);
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

}  // namespace

TimeSeriesPanel generate_synthetic(const SyntheticSpec& spec) {
    spec.validate();
    const int period = frequency_period(spec.frequency);
    const int step = frequency_step_days(spec.frequency);

    DayNumber start;
    if (!spec.start_date.empty()) {
        start = parse_date(spec.start_date);
    } else {
        // Monday anchors keep daily grids aligned with calendar weeks.
        start = spec.frequency == Frequency::daily ? days_from_civil(2018, 1, 1)
                                                   : days_from_civil(2019, 1, 7);
    }

    std::vector<DayNumber> timestamps(static_cast<std::size_t>(spec.length));
    for (int t = 0; t < spec.length; ++t) timestamps[static_cast<std::size_t>(t)] = start + static_cast<DayNumber>(t) * step;

    const double two_pi = 6.283185307179586476925286766559;
    std::vector<std::string> ids(static_cast<std::size_t>(spec.n_series));
    std::vector<int> offsets(static_cast<std::size_t>(spec.n_series), 0);
    std::vector<std::vector<double>> values(static_cast<std::size_t>(spec.n_series));
    std::vector<std::vector<std::string>> statics(static_cast<std::size_t>(spec.n_series));

    for (int i = 0; i < spec.n_series; ++i) {
        const auto idx = static_cast<std::size_t>(i);
        ids[idx] = "S" + std::to_string(i + 1);
        statics[idx] = {"ST" + std::to_string(i % 5 + 1), "CAT" + std::to_string(i % 3 + 1)};

        std::mt19937_64 rng(splitmix64(spec.rng_seed ^ (0x5851f42d4c957f2dULL + static_cast<std::uint64_t>(i))));
        std::uniform_real_distribution<double> unit(0.0, 1.0);

        double rate = spec.base_rate;
        if (spec.rate_spread > 0.0) {
            rate *= 1.0 + spec.rate_spread * (2.0 * unit(rng) - 1.0);
        }

        std::vector<double>& y = values[idx];
        y.resize(static_cast<std::size_t>(spec.length));
        for (int t = 0; t < spec.length; ++t) {
            const double seasonal =
                1.0 + spec.seasonality_amplitude * std::sin(two_pi * static_cast<double>(t % period) /
                                                            static_cast<double>(period));
            double mean = rate * seasonal * (1.0 + spec.trend_slope * static_cast<double>(t));
            if (mean < 0.0) mean = 0.0;

            double draw = 0.0;
            if (unit(rng) >= spec.zero_inflation && mean > 0.0) {
                // Negative binomial as a gamma-Poisson mixture with size k.
                std::gamma_distribution<double> gamma(spec.dispersion, mean / spec.dispersion);
                const double lambda = gamma(rng);
                std::poisson_distribution<long> poisson(lambda);
                draw = static_cast<double>(poisson(rng));
            }
            y[static_cast<std::size_t>(t)] = draw;
        }
    }

    return TimeSeriesPanel(spec.frequency, std::move(timestamps), std::move(ids),
                           std::move(offsets), std::move(values), {"store", "category"},
                           std::move(statics));
}

void write_demand_csv(const TimeSeriesPanel& panel, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw MalformedRow("cannot open for writing: " + path);
    out << "unique_id,ds,y\n";
    for (std::size_t i = 0; i < panel.n_series(); ++i) {
        for (int t = panel.start_offset(i); t < static_cast<int>(panel.n_timestamps()); ++t) {
            out << panel.series_ids()[i] << ',' << format_date(panel.timestamps()[static_cast<std::size_t>(t)])
                << ',' << format_double(panel.value_at(i, t)) << '\n';
        }
    }
}

void write_statics_csv(const TimeSeriesPanel& panel, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw MalformedRow("cannot open for writing: " + path);
    out << "unique_id";
    for (const auto& name : panel.static_names()) out << ',' << name;
    out << '\n';
    for (std::size_t i = 0; i < panel.n_series(); ++i) {
        out << panel.series_ids()[i];
        for (const auto& v : panel.statics()[i]) out << ',' << v;
        out << '\n';
    }
}

void write_calendar_csv(const TimeSeriesPanel& panel, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw MalformedRow("cannot open for writing: " + path);
    out << "ds";
    for (const auto& name : panel.calendar_names()) out << ',' << name;
    out << '\n';
    for (std::size_t t = 0; t < panel.n_timestamps(); ++t) {
        out << format_date(panel.timestamps()[t]);
        for (const auto& v : panel.calendar()[t]) out << ',' << v;
        out << '\n';
    }
}

}  // namespace retrainbench
