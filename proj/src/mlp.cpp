#include "retrainbench/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "retrainbench/errors.hpp"

namespace retrainbench {

void MlpParams::validate() const {
    if (hidden_sizes.empty()) throw ConfigError("mlp hidden_sizes must be non-empty");
    for (int h : hidden_sizes) {
        if (h < 1) throw ConfigError("mlp hidden sizes must be positive");
    }
    if (epochs < 0) throw ConfigError("mlp epochs must be >= 0");
    if (batch_size < 1) throw ConfigError("mlp batch_size must be >= 1");
    if (learning_rate <= 0.0) throw ConfigError("mlp learning_rate must be positive");
}

MlpNetwork::MlpNetwork(int n_inputs, std::vector<int> hidden_sizes, int n_outputs)
    : n_inputs_(n_inputs), n_outputs_(n_outputs), hidden_(std::move(hidden_sizes)) {
    int fan_in = n_inputs_;
    for (int h : hidden_) {
        layer_in_.push_back(fan_in);
        layer_out_.push_back(h);
        fan_in = h;
    }
    layer_in_.push_back(fan_in);
    layer_out_.push_back(n_outputs_);

    std::size_t total = 0;
    for (std::size_t l = 0; l < layer_in_.size(); ++l) {
        layer_offset_.push_back(total);
        total += static_cast<std::size_t>(layer_in_[l]) * static_cast<std::size_t>(layer_out_[l]) +
                 static_cast<std::size_t>(layer_out_[l]);
    }
    params_.assign(total, 0.0);
}

void MlpNetwork::init_weights(std::mt19937_64& rng) {
    for (std::size_t l = 0; l < layer_in_.size(); ++l) {
        const int fan_in = layer_in_[l];
        const int fan_out = layer_out_[l];
        const bool is_output = l + 1 == layer_in_.size();
        const double bound = is_output
                                 ? std::sqrt(6.0 / static_cast<double>(fan_in + fan_out))
                                 : std::sqrt(6.0 / static_cast<double>(fan_in));
        std::uniform_real_distribution<double> dist(-bound, bound);
        double* w = params_.data() + layer_offset_[l];
        const std::size_t n_weights = static_cast<std::size_t>(fan_in) * static_cast<std::size_t>(fan_out);
        for (std::size_t k = 0; k < n_weights; ++k) w[k] = dist(rng);
        for (int k = 0; k < fan_out; ++k) w[n_weights + static_cast<std::size_t>(k)] = 0.0;
    }
}

void MlpNetwork::forward(std::span<const double> input, std::vector<double>& output) const {
    std::vector<double> current(input.begin(), input.end());
    std::vector<double> next;
    for (std::size_t l = 0; l < layer_in_.size(); ++l) {
        const int fan_in = layer_in_[l];
        const int fan_out = layer_out_[l];
        const double* w = params_.data() + layer_offset_[l];
        const double* bias = w + static_cast<std::size_t>(fan_in) * static_cast<std::size_t>(fan_out);
        const bool is_output = l + 1 == layer_in_.size();
        next.assign(static_cast<std::size_t>(fan_out), 0.0);
        for (int o = 0; o < fan_out; ++o) {
            double acc = bias[o];
            const double* wrow = w + static_cast<std::size_t>(o) * static_cast<std::size_t>(fan_in);
            for (int i = 0; i < fan_in; ++i) acc += wrow[i] * current[static_cast<std::size_t>(i)];
            next[static_cast<std::size_t>(o)] = is_output ? acc : std::max(0.0, acc);
        }
        current.swap(next);
    }
    output = std::move(current);
}

double MlpNetwork::loss_and_gradient(std::span<const double> inputs,
                                     std::span<const double> targets, std::size_t batch_rows,
                                     const std::vector<double>& levels,
                                     std::vector<double>& grad) const {
    const std::size_t n_layers = layer_in_.size();
    const auto nq = static_cast<double>(levels.size());
    const double inv_rows = 1.0 / static_cast<double>(batch_rows);

    // Per-layer activations for one sample (index 0 = input).
    std::vector<std::vector<double>> acts(n_layers + 1);
    std::vector<std::vector<double>> deltas(n_layers);

    double total_loss = 0.0;
    for (std::size_t r = 0; r < batch_rows; ++r) {
        const double* x = inputs.data() + r * static_cast<std::size_t>(n_inputs_);
        acts[0].assign(x, x + n_inputs_);
        for (std::size_t l = 0; l < n_layers; ++l) {
            const int fan_in = layer_in_[l];
            const int fan_out = layer_out_[l];
            const double* w = params_.data() + layer_offset_[l];
            const double* bias = w + static_cast<std::size_t>(fan_in) * static_cast<std::size_t>(fan_out);
            const bool is_output = l + 1 == n_layers;
            acts[l + 1].assign(static_cast<std::size_t>(fan_out), 0.0);
            for (int o = 0; o < fan_out; ++o) {
                double acc = bias[o];
                const double* wrow = w + static_cast<std::size_t>(o) * static_cast<std::size_t>(fan_in);
                for (int i = 0; i < fan_in; ++i) acc += wrow[i] * acts[l][static_cast<std::size_t>(i)];
                acts[l + 1][static_cast<std::size_t>(o)] = is_output ? acc : std::max(0.0, acc);
            }
        }

        const double z = targets[r];
        const std::vector<double>& out = acts[n_layers];
        std::vector<double>& dout = deltas[n_layers - 1];
        dout.assign(out.size(), 0.0);

        const double point_err = out[0] - z;
        total_loss += point_err * point_err;
        dout[0] = 2.0 * point_err;
        for (std::size_t k = 0; k < levels.size(); ++k) {
            const double q = levels[k];
            const double o = out[k + 1];
            total_loss += (z >= o ? q * (z - o) : (1.0 - q) * (o - z)) / nq;
            if (o > z) {
                dout[k + 1] = (1.0 - q) / nq;
            } else if (o < z) {
                dout[k + 1] = -q / nq;
            }
        }

        for (std::size_t l = n_layers; l-- > 0;) {
            const int fan_in = layer_in_[l];
            const int fan_out = layer_out_[l];
            double* gw = grad.data() + layer_offset_[l];
            double* gbias = gw + static_cast<std::size_t>(fan_in) * static_cast<std::size_t>(fan_out);
            const std::vector<double>& delta = deltas[l];
            const std::vector<double>& act_in = acts[l];
            for (int o = 0; o < fan_out; ++o) {
                const double d = delta[static_cast<std::size_t>(o)] * inv_rows;
                if (d == 0.0) continue;
                double* gwrow = gw + static_cast<std::size_t>(o) * static_cast<std::size_t>(fan_in);
                for (int i = 0; i < fan_in; ++i) gwrow[i] += d * act_in[static_cast<std::size_t>(i)];
                gbias[o] += d;
            }
            if (l == 0) break;
            const double* w = params_.data() + layer_offset_[l];
            std::vector<double>& prev_delta = deltas[l - 1];
            prev_delta.assign(static_cast<std::size_t>(fan_in), 0.0);
            for (int i = 0; i < fan_in; ++i) {
                if (acts[l][static_cast<std::size_t>(i)] <= 0.0) continue;  // ReLU gate
                double acc = 0.0;
                for (int o = 0; o < fan_out; ++o) {
                    acc += delta[static_cast<std::size_t>(o)] *
                           w[static_cast<std::size_t>(o) * static_cast<std::size_t>(fan_in) +
                             static_cast<std::size_t>(i)];
                }
                prev_delta[static_cast<std::size_t>(i)] = acc;
            }
        }
    }
    return total_loss * inv_rows;
}

MlpModel::MlpModel(FeatureSchema schema, std::vector<double> levels, MlpNetwork net,
                   Standardizer scaler, std::uint64_t seed)
    : schema_(std::move(schema)),
      levels_(std::move(levels)),
      net_(std::move(net)),
      scaler_(std::move(scaler)) {
    rng_seed_ = seed;
}

void MlpModel::run(std::span<const double> row) const {
    check_row(row);
    input_buf_.resize(row.size());
    for (std::size_t j = 0; j < row.size(); ++j) {
        input_buf_[j] = (row[j] - scaler_.mean[j]) / scaler_.stddev[j];
    }
    net_.forward(input_buf_, output_buf_);
}

double MlpModel::predict_point(std::span<const double> row) const {
    run(row);
    return scaler_.target_mean + scaler_.target_stddev * output_buf_[0];
}

void MlpModel::predict_quantiles(std::span<const double> row, std::span<double> out) const {
    run(row);
    for (std::size_t k = 0; k < levels_.size(); ++k) {
        out[k] = scaler_.target_mean + scaler_.target_stddev * output_buf_[k + 1];
    }
}

std::unique_ptr<MlpModel> fit_mlp(const FeatureMatrix& matrix, const MlpParams& params,
                                  std::vector<double> quantile_levels) {
    params.validate();
    if (matrix.n_rows == 0) throw ConfigError("cannot fit mlp on an empty matrix");

    const std::size_t n = matrix.n_rows;
    const std::size_t p = matrix.n_cols;

    Standardizer scaler;
    scaler.mean.assign(p, 0.0);
    scaler.stddev.assign(p, 0.0);
    for (std::size_t r = 0; r < n; ++r) {
        const auto row = matrix.row(r);
        for (std::size_t j = 0; j < p; ++j) scaler.mean[j] += row[j];
        scaler.target_mean += matrix.y[r];
    }
    for (std::size_t j = 0; j < p; ++j) scaler.mean[j] /= static_cast<double>(n);
    scaler.target_mean /= static_cast<double>(n);
    double y_var = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
        const auto row = matrix.row(r);
        for (std::size_t j = 0; j < p; ++j) {
            const double d = row[j] - scaler.mean[j];
            scaler.stddev[j] += d * d;
        }
        const double dy = matrix.y[r] - scaler.target_mean;
        y_var += dy * dy;
    }
    for (std::size_t j = 0; j < p; ++j) {
        scaler.stddev[j] = std::sqrt(scaler.stddev[j] / static_cast<double>(n));
        if (scaler.stddev[j] <= 0.0) scaler.stddev[j] = 1.0;
    }
    scaler.target_stddev = std::sqrt(y_var / static_cast<double>(n));
    if (scaler.target_stddev <= 0.0) scaler.target_stddev = 1.0;

    std::vector<double> std_x(n * p);
    std::vector<double> std_y(n);
    for (std::size_t r = 0; r < n; ++r) {
        const auto row = matrix.row(r);
        for (std::size_t j = 0; j < p; ++j) {
            std_x[r * p + j] = (row[j] - scaler.mean[j]) / scaler.stddev[j];
        }
        std_y[r] = (matrix.y[r] - scaler.target_mean) / scaler.target_stddev;
    }

    MlpNetwork net(static_cast<int>(p), params.hidden_sizes,
                   static_cast<int>(1 + quantile_levels.size()));
    std::mt19937_64 rng(params.rng_seed);
    net.init_weights(rng);

    const auto batch = static_cast<std::size_t>(params.batch_size);
    std::vector<std::uint32_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::vector<double> batch_x(batch * p);
    std::vector<double> batch_y(batch);
    std::vector<double> grad(net.n_parameters());

    for (int epoch = 0; epoch < params.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng);
        double epoch_loss = 0.0;
        std::size_t n_batches = 0;
        for (std::size_t start = 0; start < n; start += batch) {
            const std::size_t rows = std::min(batch, n - start);
            for (std::size_t k = 0; k < rows; ++k) {
                const std::uint32_t r = order[start + k];
                std::copy_n(std_x.data() + static_cast<std::size_t>(r) * p, p,
                            batch_x.data() + k * p);
                batch_y[k] = std_y[r];
            }
            std::fill(grad.begin(), grad.end(), 0.0);
            const double loss = net.loss_and_gradient(batch_x, batch_y, rows, quantile_levels, grad);
            if (!std::isfinite(loss)) {
                throw DivergedTraining("mlp loss became non-finite at epoch " +
                                       std::to_string(epoch + 1));
            }
            epoch_loss += loss;
            ++n_batches;
            double* theta = net.parameters().data();
            for (std::size_t j = 0; j < grad.size(); ++j) theta[j] -= params.learning_rate * grad[j];
        }
        if (n_batches > 0 && !std::isfinite(epoch_loss)) {
            throw DivergedTraining("mlp epoch loss became non-finite");
        }
    }

    return std::make_unique<MlpModel>(matrix.schema, std::move(quantile_levels), std::move(net),
                                      std::move(scaler), params.rng_seed);
}

}  // namespace retrainbench
