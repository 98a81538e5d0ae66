// Python bindings for the main operations: synthetic panels, CSV ingest,
// feature building, the backtest grid, metrics, and the statistical tests.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "retrainbench/analysis.hpp"
#include "retrainbench/config.hpp"
#include "retrainbench/errors.hpp"
#include "retrainbench/metrics.hpp"
#include "retrainbench/report.hpp"
#include "retrainbench/runner.hpp"
#include "retrainbench/version.hpp"

namespace py = pybind11;
using namespace retrainbench;

namespace {

Frequency freq_of(const std::string& name) { return frequency_from_name(name); }

SyntheticSpec spec_from_kwargs(int n_series, int length, const std::string& frequency,
                               double base_rate, double rate_spread,
                               double seasonality_amplitude, double zero_inflation,
                               double trend_slope, double dispersion, std::uint64_t rng_seed,
                               const std::string& start_date) {
    SyntheticSpec spec;
    spec.n_series = n_series;
    spec.length = length;
    spec.frequency = freq_of(frequency);
    spec.base_rate = base_rate;
    spec.rate_spread = rate_spread;
    spec.seasonality_amplitude = seasonality_amplitude;
    spec.zero_inflation = zero_inflation;
    spec.trend_slope = trend_slope;
    spec.dispersion = dispersion;
    spec.rng_seed = rng_seed;
    spec.start_date = start_date;
    return spec;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Retraining-frequency backtesting engine for global demand forecasting models";
    m.attr("__version__") = kVersion;

    py::register_exception<Error>(m, "EngineError");

    py::class_<TimeSeriesPanel>(m, "Panel")
        .def_property_readonly("n_series", &TimeSeriesPanel::n_series)
        .def_property_readonly("n_timestamps", &TimeSeriesPanel::n_timestamps)
        .def_property_readonly("series_ids", &TimeSeriesPanel::series_ids)
        .def_property_readonly("frequency",
                               [](const TimeSeriesPanel& p) { return frequency_name(p.frequency()); })
        .def("timestamps",
             [](const TimeSeriesPanel& p) {
                 std::vector<std::string> out;
                 out.reserve(p.n_timestamps());
                 for (DayNumber d : p.timestamps()) out.push_back(format_date(d));
                 return out;
             })
        .def("series_length", &TimeSeriesPanel::series_length, py::arg("series"))
        .def("values", &TimeSeriesPanel::series_values, py::arg("series"),
             "Observed demand of one series (its leading missing span omitted).")
        .def("__eq__", [](const TimeSeriesPanel& a, const TimeSeriesPanel& b) { return a == b; });

    m.def("generate_synthetic", &spec_from_kwargs, py::arg("n_series") = 20,
          py::arg("length") = 260, py::arg("frequency") = "weekly", py::arg("base_rate") = 5.0,
          py::arg("rate_spread") = 0.0, py::arg("seasonality_amplitude") = 0.0,
          py::arg("zero_inflation") = 0.0, py::arg("trend_slope") = 0.0,
          py::arg("dispersion") = 1.0, py::arg("rng_seed") = 0, py::arg("start_date") = "",
          "Build a SyntheticSpec (internal helper).");
    m.def(
        "synthetic_panel",
        [](int n_series, int length, const std::string& frequency, double base_rate,
           double rate_spread, double seasonality_amplitude, double zero_inflation,
           double trend_slope, double dispersion, std::uint64_t rng_seed,
           const std::string& start_date) {
            return generate_synthetic(spec_from_kwargs(
                n_series, length, frequency, base_rate, rate_spread, seasonality_amplitude,
                zero_inflation, trend_slope, dispersion, rng_seed, start_date));
        },
        py::arg("n_series") = 20, py::arg("length") = 260, py::arg("frequency") = "weekly",
        py::arg("base_rate") = 5.0, py::arg("rate_spread") = 0.0,
        py::arg("seasonality_amplitude") = 0.0, py::arg("zero_inflation") = 0.0,
        py::arg("trend_slope") = 0.0, py::arg("dispersion") = 1.0, py::arg("rng_seed") = 0,
        py::arg("start_date") = "", "Zero-inflated negative-binomial demand panel.");

    m.def(
        "ingest_csv",
        [](const std::string& demand, const py::object& statics, const py::object& calendar,
           const std::string& frequency) {
            std::optional<std::string> statics_path;
            std::optional<std::string> calendar_path;
            if (!statics.is_none()) statics_path = statics.cast<std::string>();
            if (!calendar.is_none()) calendar_path = calendar.cast<std::string>();
            return ingest_csv(demand, statics_path, calendar_path, freq_of(frequency));
        },
        py::arg("demand_csv"), py::arg("statics_csv") = py::none(),
        py::arg("calendar_csv") = py::none(), py::arg("frequency") = "weekly");
    m.def("filter_min_length", &filter_min_length, py::arg("panel"), py::arg("min_obs"));
    m.def(
        "write_demand_csv",
        [](const TimeSeriesPanel& panel, const std::string& path) {
            write_demand_csv(panel, path);
        },
        py::arg("panel"), py::arg("path"));

    m.def(
        "seasonal_naive",
        [](const TimeSeriesPanel& panel, std::size_t series, int origin, int horizon, int season) {
            return seasonal_naive(panel, series, origin, horizon, season);
        },
        py::arg("panel"), py::arg("series"), py::arg("origin"), py::arg("horizon"),
        py::arg("season"));

    m.def(
        "rmsse",
        [](const std::vector<double>& actuals, const std::vector<double>& forecasts,
           const std::vector<double>& train, int season) {
            return rmsse(actuals, forecasts, train, season);
        },
        py::arg("actuals"), py::arg("forecasts"), py::arg("train"), py::arg("season"));
    m.def(
        "sql",
        [](const std::vector<double>& actuals, const std::vector<double>& forecasts, double q,
           const std::vector<double>& train, int season) {
            return sql(actuals, forecasts, q, train, season);
        },
        py::arg("actuals"), py::arg("quantile_forecasts"), py::arg("q"), py::arg("train"),
        py::arg("season"));
    m.def("default_quantile_levels", [] { return default_quantile_levels(); });

    m.def(
        "enumerate_origins",
        [](int horizon, int test_size, int step_size, int n_total) {
            BacktestConfig config;
            config.horizon = horizon;
            config.test_size = test_size;
            config.step_size = step_size;
            config.retrain_set = {1};
            config.baseline_r = 1;
            config.season = 1;
            return enumerate_origins(config, n_total);
        },
        py::arg("horizon"), py::arg("test_size"), py::arg("step_size"), py::arg("n_total"));

    py::class_<FriedmanResult>(m, "FriedmanResult")
        .def_readonly("k", &FriedmanResult::k)
        .def_readonly("n_blocks", &FriedmanResult::n_blocks)
        .def_readonly("scenarios", &FriedmanResult::scenarios)
        .def_readonly("mean_ranks", &FriedmanResult::mean_ranks)
        .def_readonly("chi_square", &FriedmanResult::chi_square)
        .def_readonly("p_value", &FriedmanResult::p_value)
        .def_readonly("critical_difference", &FriedmanResult::critical_difference);

    m.def(
        "friedman_nemenyi",
        [](const std::vector<std::vector<double>>& table, double alpha) {
            std::vector<int> scenarios(table.empty() ? 0 : table.front().size());
            for (std::size_t j = 0; j < scenarios.size(); ++j) {
                scenarios[j] = static_cast<int>(j + 1);
            }
            return friedman_on_table(table, scenarios, alpha);
        },
        py::arg("table"), py::arg("alpha") = 0.05,
        "Friedman test on a blocks x scenarios table of metric values.");

    m.def(
        "cost_of_ct",
        [](double ct_seconds, double rate_per_hour, std::size_t n_series_dataset,
           std::size_t n_series_target) {
            CostModel cost;
            cost.rate_per_hour = rate_per_hour;
            cost.n_series_dataset = n_series_dataset;
            cost.n_series_target = n_series_target;
            return cost_of_ct(ct_seconds, cost);
        },
        py::arg("ct_seconds"), py::arg("rate_per_hour") = 3.5, py::arg("n_series_dataset") = 1,
        py::arg("n_series_target") = 1);

    m.def(
        "run_config",
        [](const std::string& config_json, const py::object& output_dir) {
            RunConfig config = parse_run_config(config_json);
            if (!output_dir.is_none()) config.output_dir = output_dir.cast<std::string>();
            const RunOutcome outcome = run_from_config(config);
            py::dict out;
            out["output_dir"] = outcome.output_dir;
            out["n_cells"] = outcome.n_cells;
            out["n_failed"] = outcome.n_failed;
            out["warnings"] = outcome.warnings;
            return out;
        },
        py::arg("config_json"), py::arg("output_dir") = py::none(),
        "Execute the full grid from a config JSON string; returns a summary dict.");

    m.def("write_report", &write_report, py::arg("artifact_dir"));
    m.def("validate_config", [](const std::string& config_json) {
        return parse_run_config(config_json).validate();
    });
}
