#include <doctest.h>

#include <cmath>

#include "retrainbench/errors.hpp"
#include "retrainbench/features.hpp"
#include "support/builders.hpp"

using namespace retrainbench;
using builders::lag_config;
using builders::make_panel;

TEST_CASE("lag features index directly into the history") {
    const auto panel = make_panel({{1, 2, 3, 4, 5}});
    const auto config = lag_config({1, 2});
    const FeatureMatrix m = build_training_matrix(panel, 4, config);
    REQUIRE(m.n_rows == 3);  // rows at t=3..5 (1-based)
    REQUIRE(m.schema.columns == std::vector<std::string>{"lag_1", "lag_2"});
    CHECK(m.row(0)[0] == 2.0);
    CHECK(m.row(0)[1] == 1.0);
    CHECK(m.row(1)[0] == 3.0);
    CHECK(m.row(1)[1] == 2.0);
    CHECK(m.row(2)[0] == 4.0);
    CHECK(m.row(2)[1] == 3.0);
    CHECK(m.y == std::vector<double>{3.0, 4.0, 5.0});
}

TEST_CASE("rolling mean is computed over the lag-1-shifted series") {
    const auto panel = make_panel({{1, 2, 3, 4, 5, 6}});
    const auto config = lag_config({1}, {3});
    const FeatureMatrix m = build_training_matrix(panel, 5, config);
    // warm-up = 3, rows at t=4,5,6; rolling at t=5 is mean(2,3,4) = 3
    REQUIRE(m.n_rows == 3);
    const std::size_t roll = 1;  // column order: lag_1, rollmean_3
    CHECK(m.row(0)[roll] == doctest::Approx((1.0 + 2.0 + 3.0) / 3.0));
    CHECK(m.row(1)[roll] == doctest::Approx(3.0));
    CHECK(m.row(2)[roll] == doctest::Approx(4.0));
}

TEST_CASE("expanding mean of a constant series is the constant") {
    const auto panel = make_panel({{7, 7, 7, 7, 7, 7, 7}});
    FeatureConfig config = lag_config({1});
    config.use_expanding_mean = true;
    const FeatureMatrix m = build_training_matrix(panel, 6, config);
    const std::size_t col = 1;  // lag_1, expanding_mean
    for (std::size_t r = 0; r < m.n_rows; ++r) CHECK(m.row(r)[col] == 7.0);
}

TEST_CASE("expanding mean at t uses only y_1..y_{t-1}") {
    const auto panel = make_panel({{1, 2, 3, 4}});
    FeatureConfig config = lag_config({1});
    config.use_expanding_mean = true;
    const FeatureMatrix m = build_training_matrix(panel, 3, config);
    // rows at t=2,3,4: expanding means 1, 1.5, 2
    CHECK(m.row(0)[1] == doctest::Approx(1.0));
    CHECK(m.row(1)[1] == doctest::Approx(1.5));
    CHECK(m.row(2)[1] == doctest::Approx(2.0));
}

TEST_CASE("row counts follow window_len - warm_up per series") {
    const auto panel = make_panel({{1, 2, 3, 4, 5, 6, 7, 8}, {1, 2, 3, 4, 5, 6, 7, 8}});
    const auto config = lag_config({1, 4});
    const FeatureMatrix m = build_training_matrix(panel, 7, config);
    CHECK(m.n_rows == 2 * (8 - 4));
    CHECK_THROWS_AS(build_training_matrix(panel, 2, config), WindowTooShort);
}

TEST_CASE("training matrix respects end_index") {
    const auto panel = make_panel({{1, 2, 3, 4, 5, 6}});
    const auto config = lag_config({1});
    const FeatureMatrix m = build_training_matrix(panel, 3, config);
    CHECK(m.n_rows == 3);
    CHECK(m.t_index.back() == 3);
}

TEST_CASE("causality: perturbing y at t never changes rows at earlier timestamps") {
    auto values = std::vector<double>{3, 1, 4, 1, 5, 9, 2, 6, 5, 3};
    const auto panel = make_panel({values});
    FeatureConfig config = lag_config({1, 2}, {3});
    config.use_expanding_mean = true;

    const FeatureMatrix before = build_training_matrix(panel, 9, config);
    values[7] = 100.0;  // perturb t=8 (1-based)
    const auto perturbed = make_panel({values});
    const FeatureMatrix after = build_training_matrix(perturbed, 9, config);

    for (std::size_t r = 0; r < before.n_rows; ++r) {
        if (before.t_index[r] <= 7) {  // feature rows at or before the perturbed time
            const auto a = before.row(r);
            const auto b = after.row(r);
            for (std::size_t j = 0; j < before.n_cols; ++j) CHECK(a[j] == b[j]);
        }
    }
}

TEST_CASE("determinism: identical panel and config give bit-identical matrices") {
    SyntheticSpec spec;
    spec.n_series = 4;
    spec.length = 80;
    spec.rng_seed = 17;
    const auto panel = generate_synthetic(spec);
    const auto config = FeatureConfig::defaults_for(Frequency::weekly);
    const FeatureMatrix a = build_training_matrix(panel, 79, config);
    const FeatureMatrix b = build_training_matrix(panel, 79, config);
    CHECK(a.x == b.x);
    CHECK(a.y == b.y);
    CHECK(a.schema.columns == b.schema.columns);
}

TEST_CASE("one-hot statics activate exactly one indicator per attribute") {
    SyntheticSpec spec;
    spec.n_series = 7;
    spec.length = 60;
    spec.rng_seed = 2;
    const auto panel = generate_synthetic(spec);
    FeatureConfig config = lag_config({1});
    config.static_encoding = CategoryEncoding::one_hot;
    const FeatureMatrix m = build_training_matrix(panel, 59, config);

    // Columns: lag_1, then one-hot blocks per static attribute.
    std::size_t col = 1;
    for (std::size_t a = 0; a < m.schema.static_categories.size(); ++a) {
        const std::size_t n_cats = m.schema.static_categories[a].size();
        for (std::size_t r = 0; r < m.n_rows; ++r) {
            double active = 0.0;
            for (std::size_t c = 0; c < n_cats; ++c) active += m.row(r)[col + c];
            CHECK(active == 1.0);
        }
        col += n_cats;
    }
}

TEST_CASE("ordinal static encoding emits one rank column per attribute") {
    SyntheticSpec spec;
    spec.n_series = 5;
    spec.length = 40;
    spec.rng_seed = 4;
    const auto panel = generate_synthetic(spec);
    FeatureConfig config = lag_config({1});
    config.static_encoding = CategoryEncoding::ordinal;
    const FeatureMatrix m = build_training_matrix(panel, 39, config);
    CHECK(m.schema.columns.size() == 1 + panel.static_names().size());
}

TEST_CASE("log1p transform changes targets and back-transforms cleanly") {
    const auto panel = make_panel({{0, 1, 2, 3, 4, 5}});
    FeatureConfig config = lag_config({1});
    config.target_transform = TargetTransform::log1p;
    const FeatureMatrix m = build_training_matrix(panel, 5, config);
    CHECK(m.y.front() == doctest::Approx(std::log1p(1.0)));
    CHECK(invert_transform(TargetTransform::log1p, m.y.front()) == doctest::Approx(1.0));
    CHECK(m.row(1)[0] == doctest::Approx(std::log1p(1.0)));  // lag of the transformed series
}

TEST_CASE("prediction rows reproduce the training recipe") {
    const auto panel = make_panel({{1, 2, 3, 4, 5, 6, 7, 8}});
    FeatureConfig config = lag_config({1, 2}, {3});
    config.use_expanding_mean = true;
    const FeatureSchema schema = make_schema(panel, config);

    SUBCASE("empty suffix equals the one-step-ahead recipe") {
        const auto row = build_prediction_row(panel, 0, 5, config, schema, 4, {});
        // Same as the training row at t=6 built from the full panel.
        const FeatureMatrix m = build_training_matrix(panel, 5, config);
        const auto training_row = m.row(m.n_rows - 1);
        REQUIRE(row.size() == m.n_cols);
        // training row at index 5 has target y[5]; its features only use <= 4
        for (std::size_t j = 0; j < row.size(); ++j) CHECK(row[j] == training_row[j]);
    }

    SUBCASE("lag-1 feature equals the last pushed forecast") {
        const std::vector<double> suffix = {42.0, 17.0};
        const auto row = build_prediction_row(panel, 0, 7, config, schema, 4, suffix);
        CHECK(row[0] == 17.0);  // lag_1
        CHECK(row[1] == 42.0);  // lag_2
    }

    SUBCASE("substitution oracle: true future values reproduce full-panel rows") {
        const FeatureMatrix full = build_training_matrix(panel, 7, config);
        const std::vector<double> truth = {6.0, 7.0};  // y at t=6,7 (1-based)
        const auto row = build_prediction_row(panel, 0, 7, config, schema, 4, truth);
        const auto full_row = full.row(full.n_rows - 1);  // t_index == 7
        REQUIRE(full.t_index[full.n_rows - 1] == 7);
        for (std::size_t j = 0; j < row.size(); ++j) CHECK(row[j] == full_row[j]);
    }

    SUBCASE("suffix length mismatches are rejected") {
        CHECK_THROWS_AS(build_prediction_row(panel, 0, 7, config, schema, 4, {{1.0}}),
                        SuffixLengthMismatch);
        CHECK_THROWS_AS(build_prediction_row(panel, 0, 4, config, schema, 4, {}),
                        SuffixLengthMismatch);
    }
}

TEST_CASE("feature config validation") {
    FeatureConfig config;
    config.lags = {2, 1};
    CHECK_THROWS_AS(config.validate(), ConfigError);
    config.lags = {1, 1};
    CHECK_THROWS_AS(config.validate(), ConfigError);
    config.lags = {0};
    CHECK_THROWS_AS(config.validate(), ConfigError);
    config = FeatureConfig::defaults_for(Frequency::daily);
    CHECK_NOTHROW(config.validate());
    CHECK(config.warm_up() == 28);
    CHECK(FeatureConfig::defaults_for(Frequency::weekly).warm_up() == 52);
}
