#include <doctest.h>

#include <random>

#include "retrainbench/errors.hpp"
#include "retrainbench/gbt.hpp"
#include "support/oracles.hpp"

using namespace retrainbench;

namespace {

FeatureMatrix matrix_from(const std::vector<std::vector<double>>& x,
                          const std::vector<double>& y) {
    FeatureMatrix m;
    m.n_rows = x.size();
    m.n_cols = x.front().size();
    for (std::size_t j = 0; j < m.n_cols; ++j) {
        m.schema.columns.push_back("x" + std::to_string(j));
    }
    for (const auto& row : x) m.x.insert(m.x.end(), row.begin(), row.end());
    m.y = y;
    m.series.assign(m.n_rows, 0);
    m.t_index.assign(m.n_rows, 0);
    return m;
}

FeatureMatrix random_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(-3.0, 3.0);
    std::vector<std::vector<double>> x;
    std::vector<double> y;
    for (std::size_t i = 0; i < rows; ++i) {
        std::vector<double> row;
        for (std::size_t j = 0; j < cols; ++j) row.push_back(unif(rng));
        y.push_back(row[0] * 2.0 + (row.size() > 1 ? row[1] * row[1] : 0.0) + unif(rng) * 0.3);
        x.push_back(std::move(row));
    }
    return matrix_from(x, y);
}

}  // namespace

TEST_CASE("depth-0 squared stump predicts the mean") {
    const FeatureMatrix m = random_matrix(64, 2, 5);
    GbtParams params;
    params.n_trees = 1;
    params.max_depth = 0;
    const GbtBooster booster = fit_gbt_booster(m, params, GbtLoss::squared());
    double mean = 0.0;
    for (double v : m.y) mean += v;
    mean /= static_cast<double>(m.y.size());
    CHECK(booster.predict_raw(m.row(0)) == doctest::Approx(mean).epsilon(1e-12));
}

TEST_CASE("depth-0 pinball stump predicts the empirical quantile") {
    const FeatureMatrix m = random_matrix(101, 2, 6);
    GbtParams params;
    params.n_trees = 1;
    params.max_depth = 0;
    params.learning_rate = 1.0;

    SUBCASE("median") {
        const GbtBooster booster = fit_gbt_booster(m, params, GbtLoss::pinball(0.5));
        CHECK(booster.predict_raw(m.row(3)) ==
              doctest::Approx(oracles::sort_quantile(m.y, 0.5)).epsilon(1e-12));
    }
    SUBCASE("all 14 default levels") {
        for (double q : default_quantile_levels()) {
            const GbtBooster booster = fit_gbt_booster(m, params, GbtLoss::pinball(q));
            CHECK(booster.predict_raw(m.row(0)) ==
                  doctest::Approx(oracles::sort_quantile(m.y, q)).epsilon(1e-12));
        }
    }
}

TEST_CASE("one tree strictly improves on the base score") {
    const FeatureMatrix m = random_matrix(50, 3, 7);
    GbtParams params;
    params.n_trees = 1;
    params.max_depth = 2;
    params.min_leaf = 5;
    const GbtBooster booster = fit_gbt_booster(m, params, GbtLoss::squared());
    REQUIRE(booster.train_loss.size() == 2);
    // Direct recomputation from predictions.
    double loss = 0.0;
    for (std::size_t r = 0; r < m.n_rows; ++r) {
        const double d = m.y[r] - booster.predict_raw(m.row(r));
        loss += d * d;
    }
    loss /= static_cast<double>(m.n_rows);
    CHECK(booster.train_loss.back() == doctest::Approx(loss).epsilon(1e-12));
    CHECK(booster.train_loss[1] < booster.train_loss[0]);
}

TEST_CASE("training loss is non-increasing in the tree index") {
    const FeatureMatrix m = random_matrix(300, 4, 8);
    GbtParams params;
    params.n_trees = 40;
    params.max_depth = 3;
    params.min_leaf = 10;
    for (GbtLoss loss : {GbtLoss::squared(), GbtLoss::pinball(0.9)}) {
        const GbtBooster booster = fit_gbt_booster(m, params, loss);
        for (std::size_t t = 1; t < booster.train_loss.size(); ++t) {
            CHECK(booster.train_loss[t] <= booster.train_loss[t - 1] + 1e-12);
        }
    }
}

TEST_CASE("an interpolating ensemble reaches near-zero error on tiny noiseless data") {
    std::vector<std::vector<double>> x;
    std::vector<double> y;
    for (int i = 0; i < 16; ++i) {
        x.push_back({static_cast<double>(i)});
        y.push_back(i % 4 == 0 ? 5.0 : static_cast<double>(i));
    }
    const FeatureMatrix m = matrix_from(x, y);
    GbtParams params;
    params.n_trees = 200;
    params.learning_rate = 1.0;
    params.max_depth = 6;
    params.min_leaf = 1;
    params.n_bins = 64;
    const GbtBooster booster = fit_gbt_booster(m, params, GbtLoss::squared());
    for (std::size_t r = 0; r < m.n_rows; ++r) {
        CHECK(booster.predict_raw(m.row(r)) == doctest::Approx(m.y[r]).epsilon(1e-6));
    }
}

TEST_CASE("nodes that cannot split become leaves instead of raising") {
    // All feature values identical: no split possible anywhere.
    std::vector<std::vector<double>> x(20, std::vector<double>{1.0});
    std::vector<double> y;
    for (int i = 0; i < 20; ++i) y.push_back(static_cast<double>(i));
    const FeatureMatrix m = matrix_from(x, y);
    GbtParams params;
    params.n_trees = 3;
    params.max_depth = 4;
    params.min_leaf = 2;
    CHECK_NOTHROW(fit_gbt_booster(m, params, GbtLoss::squared()));
}

TEST_CASE("deterministic: identical data produces identical boosters") {
    const FeatureMatrix m = random_matrix(120, 3, 9);
    GbtParams params;
    params.n_trees = 10;
    const GbtBooster a = fit_gbt_booster(m, params, GbtLoss::squared());
    const GbtBooster b = fit_gbt_booster(m, params, GbtLoss::squared());
    REQUIRE(a.trees.size() == b.trees.size());
    CHECK(a.train_loss == b.train_loss);
    for (std::size_t r = 0; r < m.n_rows; ++r) {
        CHECK(a.predict_raw(m.row(r)) == b.predict_raw(m.row(r)));
    }
}

TEST_CASE("full gbt model emits ordered quantiles through predict()") {
    const FeatureMatrix m = random_matrix(200, 3, 10);
    GbtParams params;
    params.n_trees = 8;
    const auto model = fit_gbt(m, params, {0.25, 0.75});
    const ForecastRecord record = predict(*model, m.row(0), 0, 0, 1);
    CHECK(record.quantiles[0] <= record.quantiles[1]);
    CHECK(record.point >= 0.0);
}

TEST_CASE("parameter validation") {
    GbtParams params;
    params.n_bins = 1;
    CHECK_THROWS_AS(params.validate(), ConfigError);
    params = GbtParams{};
    params.n_trees = 0;
    CHECK_THROWS_AS(params.validate(), ConfigError);
}
