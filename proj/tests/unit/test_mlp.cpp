#include <doctest.h>

#include <cmath>
#include <random>

#include "retrainbench/errors.hpp"
#include "retrainbench/mlp.hpp"

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

}  // namespace

TEST_CASE("analytic gradients match central finite differences") {
    const std::vector<double> levels = {0.1, 0.5, 0.9};
    MlpNetwork net(3, {4}, 1 + static_cast<int>(levels.size()));
    std::mt19937_64 rng(123);
    net.init_weights(rng);

    // A small batch with targets off the kink so the pinball loss is smooth
    // in a neighbourhood of every probe.
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    const std::size_t rows = 6;
    std::vector<double> inputs(rows * 3);
    std::vector<double> targets(rows);
    for (std::size_t i = 0; i < inputs.size(); ++i) inputs[i] = unif(rng);
    for (std::size_t i = 0; i < rows; ++i) targets[i] = unif(rng) * 2.0;

    std::vector<double> grad(net.n_parameters(), 0.0);
    net.loss_and_gradient(inputs, targets, rows, levels, grad);

    std::uniform_int_distribution<std::size_t> pick(0, net.n_parameters() - 1);
    const double eps = 1e-6;
    double max_rel_err = 0.0;
    for (int probe = 0; probe < 100; ++probe) {
        const std::size_t j = pick(rng);
        std::vector<double> unused(net.n_parameters(), 0.0);
        const double saved = net.parameters()[j];
        net.parameters()[j] = saved + eps;
        const double up = net.loss_and_gradient(inputs, targets, rows, levels, unused);
        net.parameters()[j] = saved - eps;
        std::fill(unused.begin(), unused.end(), 0.0);
        const double down = net.loss_and_gradient(inputs, targets, rows, levels, unused);
        net.parameters()[j] = saved;

        const double fd = (up - down) / (2.0 * eps);
        const double denom = std::max({std::abs(fd), std::abs(grad[j]), 1e-8});
        max_rel_err = std::max(max_rel_err, std::abs(fd - grad[j]) / denom);
    }
    CHECK(max_rel_err < 1e-4);
}

TEST_CASE("zero-epoch training leaves the initialization forward pass") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    std::vector<std::vector<double>> x;
    std::vector<double> y;
    for (int i = 0; i < 40; ++i) {
        x.push_back({unif(rng), unif(rng)});
        y.push_back(unif(rng));
    }
    const FeatureMatrix m = matrix_from(x, y);
    MlpParams params;
    params.hidden_sizes = {8};
    params.epochs = 0;
    params.rng_seed = 77;
    const auto a = fit_mlp(m, params, {0.5});
    const auto b = fit_mlp(m, params, {0.5});
    for (std::size_t r = 0; r < m.n_rows; ++r) {
        CHECK(a->predict_point(m.row(r)) == b->predict_point(m.row(r)));
    }
    // Different seed, different initialization, different prediction.
    params.rng_seed = 78;
    const auto c = fit_mlp(m, params, {0.5});
    CHECK(a->predict_point(m.row(0)) != c->predict_point(m.row(0)));
}

TEST_CASE("constant-target data converges to the constant") {
    std::mt19937_64 rng(6);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    std::vector<std::vector<double>> x;
    std::vector<double> y;
    for (int i = 0; i < 256; ++i) {
        x.push_back({unif(rng), unif(rng), unif(rng)});
        y.push_back(10.0);
    }
    const FeatureMatrix m = matrix_from(x, y);
    MlpParams params;
    params.hidden_sizes = {16};
    params.epochs = 30;
    params.batch_size = 32;
    params.learning_rate = 0.05;
    params.rng_seed = 3;
    const auto model = fit_mlp(m, params, {0.25, 0.75});
    for (std::size_t r = 0; r < 10; ++r) {
        CHECK(model->predict_point(m.row(r)) == doctest::Approx(10.0).epsilon(0.01));
    }
}

TEST_CASE("training is deterministic under a fixed seed") {
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    std::vector<std::vector<double>> x;
    std::vector<double> y;
    for (int i = 0; i < 120; ++i) {
        x.push_back({unif(rng), unif(rng)});
        y.push_back(x.back()[0] - 2.0 * x.back()[1] + unif(rng) * 0.1);
    }
    const FeatureMatrix m = matrix_from(x, y);
    MlpParams params;
    params.hidden_sizes = {8, 4};
    params.epochs = 10;
    params.batch_size = 16;
    params.rng_seed = 11;
    const auto a = fit_mlp(m, params, {0.5});
    const auto b = fit_mlp(m, params, {0.5});
    CHECK(a->network().parameters() == b->network().parameters());
}

TEST_CASE("diverged training is reported") {
    std::vector<std::vector<double>> x;
    std::vector<double> y;
    for (int i = 0; i < 64; ++i) {
        x.push_back({static_cast<double>(i)});
        y.push_back(static_cast<double>(i * i));
    }
    const FeatureMatrix m = matrix_from(x, y);
    MlpParams params;
    params.hidden_sizes = {16};
    params.epochs = 200;
    params.learning_rate = 1e4;  // guaranteed blow-up
    params.rng_seed = 1;
    CHECK_THROWS_AS(fit_mlp(m, params, {0.5}), DivergedTraining);
}

TEST_CASE("quantile heads order themselves on skewed noise") {
    std::mt19937_64 rng(14);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::vector<std::vector<double>> x;
    std::vector<double> y;
    for (int i = 0; i < 2000; ++i) {
        const double xi = unif(rng);
        x.push_back({xi});
        y.push_back(5.0 * xi + unif(rng) * 4.0);
    }
    const FeatureMatrix m = matrix_from(x, y);
    MlpParams params;
    params.hidden_sizes = {16};
    params.epochs = 60;
    params.batch_size = 64;
    params.learning_rate = 0.05;
    params.rng_seed = 2;
    const auto model = fit_mlp(m, params, {0.1, 0.9});
    std::vector<double> q(2);
    model->predict_quantiles(std::vector<double>{0.5}, q);
    CHECK(q[0] < q[1]);
    // Uniform(0,4) noise: decile gap should be clearly positive (3.2 ideal).
    CHECK(q[1] - q[0] > 1.5);
}
