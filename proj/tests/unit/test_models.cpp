#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>

#include "retrainbench/errors.hpp"
#include "retrainbench/gbt.hpp"
#include "retrainbench/linear.hpp"
#include "retrainbench/mlp.hpp"
#include "retrainbench/models.hpp"
#include "support/builders.hpp"

using namespace retrainbench;
using builders::lag_config;
using builders::make_panel;

TEST_CASE("seasonal naive repeats the last seasonal cycle") {
    const auto panel = make_panel({{1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13, 14}});

    SUBCASE("s=1 repeats the last observed value") {
        const auto f = seasonal_naive(panel, 0, 9, 5, 1);
        for (double v : f) CHECK(v == 10.0);
    }
    SUBCASE("s=7 step 1 equals the value seven periods before origin+1") {
        const auto f = seasonal_naive(panel, 0, 9, 7, 7);
        CHECK(f[0] == panel.value_at(0, 3));  // origin - 7 + 1
    }
    SUBCASE("steps 8..14 repeat steps 1..7") {
        const auto f = seasonal_naive(panel, 0, 6, 14, 7);
        for (int k = 0; k < 7; ++k) CHECK(f[static_cast<std::size_t>(k + 7)] == f[static_cast<std::size_t>(k)]);
    }
    SUBCASE("too little history raises") {
        CHECK_THROWS_AS(seasonal_naive(panel, 0, 3, 5, 7), HistoryTooShort);
    }
}

TEST_CASE("quantile level column names") {
    CHECK(quantile_level_text(0.005) == "0.005");
    CHECK(quantile_level_text(0.05) == "0.05");
    CHECK(quantile_level_text(0.1) == "0.1");
    CHECK(quantile_level_text(0.975) == "0.975");
    CHECK(default_quantile_levels().size() == 14);
}

TEST_CASE("forecast records are rearranged and clipped") {
    const auto panel = make_panel({{1, 2, 3, 4, 5, 6}});
    const auto config = lag_config({1});
    const FeatureMatrix m = build_training_matrix(panel, 5, config);
    LinearFitOptions options;
    options.quantile_epochs = 0;
    const auto model = fit_pooled_linear(m, options, {0.25, 0.75});

    SUBCASE("quantiles sorted non-decreasing") {
        ForecastRecord record =
            finalize_forecast(*model, 0, 4, 1, 2.0, {5.0, 1.0});
        CHECK(record.quantiles == std::vector<double>{1.0, 5.0});
    }
    SUBCASE("negative raw values are clipped to zero") {
        ForecastRecord record = finalize_forecast(*model, 0, 4, 1, -0.3, {-2.0, 0.5});
        CHECK(record.point == 0.0);
        CHECK(record.quantiles == std::vector<double>{0.0, 0.5});
    }
}

TEST_CASE("family names and labels") {
    CHECK(family_from_name("gbt") == ModelFamily::gbt);
    CHECK(std::string(family_label(ModelFamily::pooled_linear)) == "ML");
    CHECK(std::string(family_label(ModelFamily::gbt)) == "ML");
    CHECK(std::string(family_label(ModelFamily::mlp)) == "DL");
    CHECK_THROWS_AS(family_from_name("xgboost"), ConfigError);
}

namespace {

std::string temp_model_path(const char* tag) {
    return (std::filesystem::temp_directory_path() / (std::string("rb_model_") + tag + ".rbmodel"))
        .string();
}

std::string file_bytes(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

FeatureMatrix toy_matrix(std::uint64_t seed, std::size_t rows = 120) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    FeatureMatrix m;
    m.n_rows = rows;
    m.n_cols = 3;
    m.schema.columns = {"a", "b", "c"};
    for (std::size_t r = 0; r < rows; ++r) {
        const double a = unif(rng), b = unif(rng), c = unif(rng);
        m.x.insert(m.x.end(), {a, b, c});
        m.y.push_back(2.0 * a - b + 0.2 * c + unif(rng) * 0.05);
        m.series.push_back(0);
        m.t_index.push_back(static_cast<std::int32_t>(r));
    }
    return m;
}

}  // namespace

TEST_CASE("model dump round-trips bit-exactly") {
    const FeatureMatrix m = toy_matrix(31);
    const std::vector<double> levels = {0.25, 0.5, 0.75};

    SUBCASE("pooled_linear") {
        LinearFitOptions options;
        options.quantile_epochs = 20;
        const auto model = fit_pooled_linear(m, options, levels);
        const std::string path = temp_model_path("linear");
        save_model(*model, path);
        const auto loaded = load_model(path);
        const std::string path2 = temp_model_path("linear2");
        save_model(*loaded, path2);
        CHECK(file_bytes(path) == file_bytes(path2));
        CHECK(loaded->predict_point(m.row(0)) == model->predict_point(m.row(0)));
    }
    SUBCASE("gbt") {
        GbtParams params;
        params.n_trees = 6;
        const auto model = fit_gbt(m, params, levels);
        const std::string path = temp_model_path("gbt");
        save_model(*model, path);
        const auto loaded = load_model(path);
        const std::string path2 = temp_model_path("gbt2");
        save_model(*loaded, path2);
        CHECK(file_bytes(path) == file_bytes(path2));
        std::vector<double> qa(levels.size()), qb(levels.size());
        model->predict_quantiles(m.row(5), qa);
        loaded->predict_quantiles(m.row(5), qb);
        CHECK(qa == qb);
    }
    SUBCASE("mlp") {
        MlpParams params;
        params.hidden_sizes = {6};
        params.epochs = 4;
        params.rng_seed = 9;
        const auto model = fit_mlp(m, params, levels);
        const std::string path = temp_model_path("mlp");
        save_model(*model, path);
        const auto loaded = load_model(path);
        const std::string path2 = temp_model_path("mlp2");
        save_model(*loaded, path2);
        CHECK(file_bytes(path) == file_bytes(path2));
        CHECK(loaded->predict_point(m.row(7)) == model->predict_point(m.row(7)));
    }
}

TEST_CASE("loading garbage fails cleanly") {
    const std::string path = temp_model_path("garbage");
    std::ofstream(path) << "not a model";
    CHECK_THROWS_AS(load_model(path), MalformedRow);
    CHECK_THROWS_AS(load_model("/nonexistent/nope.rbmodel"), MissingArtifact);
}
