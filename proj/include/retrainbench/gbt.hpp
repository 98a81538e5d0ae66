#pragma once

#include "retrainbench/models.hpp"

namespace retrainbench {

struct GbtParams {
    int n_trees = 100;
    double learning_rate = 0.1;
    int max_depth = 3;   // 0 = stump (single leaf)
    int min_leaf = 20;
    int n_bins = 64;

    void validate() const;
};

struct GbtLoss {
    enum class Kind { squared, pinball };
    Kind kind = Kind::squared;
    double q = 0.5;  // pinball level, ignored for squared

    static GbtLoss squared() { return {Kind::squared, 0.5}; }
    static GbtLoss pinball(double q) { return {Kind::pinball, q}; }
};

struct GbtTreeNode {
    int feature = -1;        // -1 marks a leaf
    double threshold = 0.0;  // go left when x[feature] <= threshold
    int left = -1;
    int right = -1;
    double value = 0.0;      // leaf value
};

/// One boosted ensemble: histogram-quantized split search, depth-wise growth,
/// per-leaf line search (mean for squared loss, empirical quantile for
/// pinball). Nodes that cannot split become leaves.
struct GbtBooster {
    GbtLoss loss;
    double learning_rate = 0.1;
    double base_score = 0.0;
    std::vector<std::vector<GbtTreeNode>> trees;
    std::vector<double> train_loss;  // loss at the base score, then after each tree

    double predict_raw(std::span<const double> row) const;
};

GbtBooster fit_gbt_booster(const FeatureMatrix& matrix, const GbtParams& params, GbtLoss loss);

/// Squared-loss point ensemble plus one native pinball ensemble per level.
class GbtModel final : public GlobalModel {
public:
    GbtModel(FeatureSchema schema, std::vector<double> levels, GbtBooster point,
             std::vector<GbtBooster> quantile_heads);

    ModelFamily family() const override { return ModelFamily::gbt; }
    const FeatureSchema& schema() const override { return schema_; }
    const std::vector<double>& quantile_levels() const override { return levels_; }

    double predict_point(std::span<const double> row) const override;
    void predict_quantiles(std::span<const double> row, std::span<double> out) const override;

    const GbtBooster& point_booster() const { return point_; }
    const std::vector<GbtBooster>& quantile_heads() const { return quantile_heads_; }

private:
    FeatureSchema schema_;
    std::vector<double> levels_;
    GbtBooster point_;
    std::vector<GbtBooster> quantile_heads_;
};

std::unique_ptr<GbtModel> fit_gbt(const FeatureMatrix& matrix, const GbtParams& params,
                                  std::vector<double> quantile_levels);

/// Sort-based empirical quantile (inverted CDF): sorted[ceil(q*n) - 1].
double empirical_quantile(std::vector<double> values, double q);

}  // namespace retrainbench
