#pragma once

#include <random>

#include "retrainbench/models.hpp"

namespace retrainbench {

struct MlpParams {
    std::vector<int> hidden_sizes = {32};
    int epochs = 30;
    int batch_size = 256;
    double learning_rate = 0.05;
    std::uint64_t rng_seed = 0;

    void validate() const;
};

/// Plain feed-forward network with ReLU hidden layers and linear outputs,
/// parameters held in one flat vector (per layer: weights row-major, then
/// biases). Output 0 is the point head; outputs 1..n are quantile heads.
class MlpNetwork {
public:
    MlpNetwork(int n_inputs, std::vector<int> hidden_sizes, int n_outputs);

    int n_inputs() const { return n_inputs_; }
    int n_outputs() const { return n_outputs_; }
    const std::vector<int>& hidden_sizes() const { return hidden_; }

    std::size_t n_parameters() const { return params_.size(); }
    std::vector<double>& parameters() { return params_; }
    const std::vector<double>& parameters() const { return params_; }

    void init_weights(std::mt19937_64& rng);

    void forward(std::span<const double> input, std::vector<double>& output) const;

    /// Mean composite loss over the batch: squared error of the point head
    /// plus the mean pinball loss of the quantile heads. Adds the gradient of
    /// the mean loss into `grad` (same layout as parameters()).
    double loss_and_gradient(std::span<const double> inputs, std::span<const double> targets,
                             std::size_t batch_rows, const std::vector<double>& levels,
                             std::vector<double>& grad) const;

private:
    int n_inputs_;
    int n_outputs_;
    std::vector<int> hidden_;
    std::vector<int> layer_in_;   // fan-in per layer
    std::vector<int> layer_out_;  // fan-out per layer
    std::vector<std::size_t> layer_offset_;  // offset of each layer's weights in params_
    std::vector<double> params_;
};

/// Per-feature standardization fitted on the training matrix (zero stddev
/// falls back to 1), applied to inputs and to the target.
struct Standardizer {
    std::vector<double> mean;
    std::vector<double> stddev;
    double target_mean = 0.0;
    double target_stddev = 1.0;
};

class MlpModel final : public GlobalModel {
public:
    MlpModel(FeatureSchema schema, std::vector<double> levels, MlpNetwork net,
             Standardizer scaler, std::uint64_t seed);

    ModelFamily family() const override { return ModelFamily::mlp; }
    const FeatureSchema& schema() const override { return schema_; }
    const std::vector<double>& quantile_levels() const override { return levels_; }

    double predict_point(std::span<const double> row) const override;
    void predict_quantiles(std::span<const double> row, std::span<double> out) const override;

    const MlpNetwork& network() const { return net_; }
    const Standardizer& scaler() const { return scaler_; }

private:
    void run(std::span<const double> row) const;

    FeatureSchema schema_;
    std::vector<double> levels_;
    MlpNetwork net_;
    Standardizer scaler_;
    mutable std::vector<double> input_buf_;
    mutable std::vector<double> output_buf_;
};

/// Mini-batch SGD on the composite loss; deterministic under a fixed seed.
/// Throws DivergedTraining when the loss stops being finite.
std::unique_ptr<MlpModel> fit_mlp(const FeatureMatrix& matrix, const MlpParams& params,
                                  std::vector<double> quantile_levels);

}  // namespace retrainbench
