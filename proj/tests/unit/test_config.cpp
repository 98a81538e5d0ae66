#include <doctest.h>

#include "retrainbench/config.hpp"
#include "retrainbench/errors.hpp"

using namespace retrainbench;

namespace {

const char* kMinimalWeekly = R"({
  "dataset": {"source": "synthetic", "frequency": "weekly", "min_obs": 120,
              "synthetic": {"n_series": 5, "length": 150, "rng_seed": 3}},
  "features": {"lags": [1, 2, 4], "rolling_windows": [4], "use_expanding_mean": true,
               "calendar_fields": ["year", "week"]},
  "backtest": {"horizon": 6, "test_size": 20, "retrain_set": [1, 2, 20], "baseline_r": 1,
               "season": 1},
  "output": {"directory": "out_test"}
})";

}  // namespace

TEST_CASE("minimal config parses with frequency-aware defaults") {
    const RunConfig config = parse_run_config(kMinimalWeekly);
    CHECK(config.frequency == Frequency::weekly);
    CHECK(config.min_obs == 120);
    CHECK(config.synthetic.n_series == 5);
    CHECK(config.features.lags == std::vector<int>{1, 2, 4});
    CHECK(config.backtest.horizon == 6);
    CHECK(config.families.size() == 3);  // defaults
    CHECK(config.hyper.quantile_levels.size() == 14);
    CHECK(config.alpha == 0.05);
    CHECK_NOTHROW(config.validate());
}

TEST_CASE("defaults mirror the frequency") {
    const RunConfig weekly = parse_run_config(R"({"dataset": {"frequency": "weekly"}})");
    CHECK(weekly.backtest.retrain_set == std::vector<int>{1, 2, 3, 4, 6, 8, 10, 13, 26, 52});
    CHECK(weekly.backtest.baseline_r == 1);
    CHECK(weekly.backtest.season == 1);
    CHECK(weekly.min_obs == 157);

    const RunConfig daily = parse_run_config(R"({"dataset": {"frequency": "daily"}})");
    CHECK(daily.backtest.retrain_set ==
          std::vector<int>{7, 14, 21, 30, 60, 90, 120, 150, 180, 364});
    CHECK(daily.backtest.baseline_r == 7);
    CHECK(daily.backtest.season == 7);
    CHECK(daily.min_obs == 730);
    CHECK(daily.features.lags == std::vector<int>{1, 7, 14, 28});
}

TEST_CASE("validation failures name the violation") {
    SUBCASE("baseline not in the retrain set") {
        RunConfig config = parse_run_config(kMinimalWeekly);
        config.backtest.baseline_r = 5;
        try {
            config.validate();
            FAIL("expected ConfigError");
        } catch (const ConfigError& e) {
            CHECK(std::string(e.what()).find("baseline_r") != std::string::npos);
        }
    }
    SUBCASE("min_obs too small for warm-up plus test") {
        RunConfig config = parse_run_config(kMinimalWeekly);
        config.min_obs = 24;  // needs test_size + warm_up + 1 = 25
        CHECK_THROWS_AS(config.validate(), ConfigError);
    }
    SUBCASE("csv source requires a demand path") {
        RunConfig config = parse_run_config(kMinimalWeekly);
        config.dataset_source = "csv";
        CHECK_THROWS_AS(config.validate(), ConfigError);
    }
    SUBCASE("unsupported alpha") {
        RunConfig config = parse_run_config(kMinimalWeekly);
        config.alpha = 0.01;
        CHECK_THROWS_AS(config.validate(), ConfigError);
    }
    SUBCASE("unknown keys are rejected") {
        CHECK_THROWS_AS(parse_run_config(R"({"dataset": {"frequenzy": "weekly"}})"), ConfigError);
        CHECK_THROWS_AS(parse_run_config(R"({"datasets": {}})"), ConfigError);
    }
    SUBCASE("malformed json is rejected") {
        CHECK_THROWS_AS(parse_run_config("{not json"), ConfigError);
    }
    SUBCASE("quantile levels must be increasing inside (0,1)") {
        RunConfig config = parse_run_config(kMinimalWeekly);
        config.hyper.quantile_levels = {0.5, 0.5};
        CHECK_THROWS_AS(config.validate(), ConfigError);
        config.hyper.quantile_levels = {0.0, 0.5};
        CHECK_THROWS_AS(config.validate(), ConfigError);
    }
}

TEST_CASE("daily retrain scenarios below 7 warn but do not fail") {
    RunConfig config = parse_run_config(R"({
      "dataset": {"frequency": "daily", "min_obs": 760,
                  "synthetic": {"n_series": 3, "length": 800}},
      "backtest": {"horizon": 28, "test_size": 364,
                   "retrain_set": [1, 7, 364], "baseline_r": 7, "season": 7}
    })");
    const std::vector<std::string> warnings = config.validate();
    REQUIRE(warnings.size() == 1);
    CHECK(warnings.front().find("r=7") != std::string::npos);
}

TEST_CASE("resolved config round-trips through the parser") {
    const RunConfig config = parse_run_config(kMinimalWeekly);
    const std::string dumped = config.to_json();
    const RunConfig again = parse_run_config(dumped);
    CHECK(again.to_json() == dumped);
    CHECK(again.backtest.retrain_set == config.backtest.retrain_set);
    CHECK(again.features.lags == config.features.lags);
    CHECK(again.hyper.gbt.n_trees == config.hyper.gbt.n_trees);
    CHECK(again.synthetic.rng_seed == config.synthetic.rng_seed);
}
