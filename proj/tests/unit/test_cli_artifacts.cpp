#include <doctest.h>

#include <filesystem>
#include <fstream>

#include <nlohmann/json.hpp>

#include "retrainbench/csv.hpp"
#include "retrainbench/errors.hpp"
#include "retrainbench/report.hpp"
#include "retrainbench/runner.hpp"

using namespace retrainbench;
namespace fs = std::filesystem;

namespace {

RunConfig demo_config(const std::string& out_dir) {
    RunConfig config = parse_run_config(R"({
      "dataset": {"source": "synthetic", "frequency": "weekly", "min_obs": 80,
                  "synthetic": {"n_series": 6, "length": 110, "base_rate": 6.0,
                                 "zero_inflation": 0.2, "rng_seed": 5}},
      "features": {"lags": [1, 2], "rolling_windows": [4], "use_expanding_mean": true,
                   "calendar_fields": ["week"]},
      "models": {"families": ["pooled_linear", "seasonal_naive"], "rng_seed": 9,
                  "quantile_levels": [0.25, 0.5, 0.75],
                  "pooled_linear": {"quantile_epochs": 10}},
      "backtest": {"horizon": 4, "test_size": 16, "retrain_set": [1, 4, 16], "baseline_r": 1,
                   "season": 1},
      "analysis": {"alpha": 0.05, "cost": {"rate_per_hour": 3.5, "n_series_target": 1000}}
    })");
    config.output_dir = out_dir;
    return config;
}

std::string fresh_dir(const char* tag) {
    const auto dir = fs::temp_directory_path() / (std::string("rb_artifacts_") + tag);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir.string();
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in);
    return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

}  // namespace

TEST_CASE("run_from_config emits the full artifact set") {
    const std::string dir = fresh_dir("full");
    const RunOutcome outcome = run_from_config(demo_config(dir));
    CHECK(outcome.n_failed == 0);
    CHECK(outcome.n_cells == 6);
    for (const char* name :
         {"forecasts.csv", "fits.csv", "metrics.csv", "metrics_detail.csv", "stats.json",
          "cost.csv", "optimal.csv", "resolved_config.json", "manifest.json"}) {
        CHECK_MESSAGE(fs::exists(fs::path(dir) / name), name);
    }

    SUBCASE("forecast header carries the configured quantile columns") {
        const CsvTable forecasts = read_csv(dir + "/forecasts.csv");
        REQUIRE(forecasts.header.size() == 7 + 3);
        CHECK(forecasts.header[0] == "model");
        CHECK(forecasts.header[7] == "q0.25");
        CHECK(forecasts.header[9] == "q0.75");
    }

    SUBCASE("r = T shows exactly one fit in fits.csv") {
        const CsvTable fits = read_csv(dir + "/fits.csv");
        std::size_t n_full = 0;
        for (const auto& row : fits.rows) {
            if (row[0] == "pooled_linear" && row[1] == "16") ++n_full;
        }
        CHECK(n_full == 1);
    }

    SUBCASE("manifest marks completion and cells") {
        const auto manifest = nlohmann::json::parse(slurp(fs::path(dir) / "manifest.json"));
        CHECK(manifest.at("status") == "complete");
        CHECK(manifest.at("cells").size() == 6);
    }

    SUBCASE("metrics.csv baseline rows are exactly 1") {
        const CsvTable metrics = read_csv(dir + "/metrics.csv");
        for (const auto& row : metrics.rows) {
            if (row[1] == "1") {
                CHECK(row[5] == "1");  // rel_rmsse
                CHECK(row[6] == "1");  // rel_smql
                CHECK(row[7] == "1");  // rel_ct
            }
        }
    }

    SUBCASE("report renders self-contained SVGs whose data matches metrics.csv") {
        const auto files = write_report(dir);
        CHECK(files.size() == 7);
        for (const char* name : {"rel_rmsse.svg", "rel_smql.svg", "rel_ct.svg", "cost.svg",
                                 "savings.svg", "optimal_hist.svg", "summary.txt"}) {
            CHECK(fs::exists(fs::path(dir) / name));
        }
        const auto meta =
            nlohmann::json::parse(extract_chart_data(dir + "/rel_rmsse.svg"));
        CHECK(meta.at("x") == nlohmann::json({1, 4, 16}));

        // Parse-back oracle: chart values equal metrics.csv values.
        const CsvTable metrics = read_csv(dir + "/metrics.csv");
        for (const auto& row : metrics.rows) {
            const std::string& model = row[0];
            const int r = std::stoi(row[1]);
            double expected = 0.0;
            REQUIRE(parse_double(row[5], expected));
            const auto& xs = meta.at("x");
            for (std::size_t i = 0; i < xs.size(); ++i) {
                if (xs[i].get<int>() == r) {
                    CHECK(meta.at("series").at(model)[i].get<double>() == expected);
                }
            }
        }

        // Baseline point sits at exactly 1.0 on every relative chart.
        for (const char* chart : {"rel_rmsse.svg", "rel_smql.svg", "rel_ct.svg"}) {
            const auto m = nlohmann::json::parse(extract_chart_data(dir + "/" + chart));
            for (const auto& [name, ys] : m.at("series").items()) {
                CHECK(ys[0].get<double>() == 1.0);  // x[0] == baseline r=1
            }
        }

        // Histogram bin count equals the scenario count.
        const auto hist = nlohmann::json::parse(extract_chart_data(dir + "/optimal_hist.svg"));
        CHECK(hist.at("x").size() == 3);
    }

    SUBCASE("report on an empty directory reports the missing artifact") {
        const std::string empty = fresh_dir("empty");
        CHECK_THROWS_AS(write_report(empty), MissingArtifact);
    }
}

TEST_CASE("reruns with the same seed reproduce non-timing artifacts byte-exactly") {
    const std::string dir_a = fresh_dir("rerun_a");
    const std::string dir_b = fresh_dir("rerun_b");
    run_from_config(demo_config(dir_a));
    run_from_config(demo_config(dir_b));

    // resolved_config.json is excluded: it echoes the differing output dirs.
    for (const char* name : {"forecasts.csv", "metrics_detail.csv", "stats.json", "optimal.csv"}) {
        CHECK_MESSAGE(slurp(fs::path(dir_a) / name) == slurp(fs::path(dir_b) / name), name);
    }
}

TEST_CASE("failed families do not poison the grid") {
    RunConfig config = demo_config(fresh_dir("partial"));
    // An mlp with a hostile learning rate diverges; the rest of the grid
    // completes and the manifest records the failures.
    config.families = {ModelFamily::pooled_linear, ModelFamily::mlp};
    config.hyper.mlp.learning_rate = 1e9;
    config.hyper.mlp.epochs = 40;
    config.hyper.mlp.hidden_sizes = {8};
    const RunOutcome outcome = run_from_config(config);
    CHECK(outcome.n_cells == 6);
    CHECK(outcome.n_failed == 3);
    CHECK(outcome.partial());
    const auto manifest =
        nlohmann::json::parse(slurp(fs::path(config.output_dir) / "manifest.json"));
    CHECK(manifest.at("status") == "partial");
    // Friedman over the remaining family still works; stats.json exists.
    CHECK(fs::exists(fs::path(config.output_dir) / "stats.json"));
}
