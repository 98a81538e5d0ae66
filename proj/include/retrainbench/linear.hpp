#pragma once

#include "retrainbench/models.hpp"

namespace retrainbench {

struct LinearFitOptions {
    double ridge_lambda = 1.0;        // L2 penalty on non-intercept coefficients
    int quantile_epochs = 120;        // full-batch subgradient passes per quantile head
    double quantile_learning_rate = 0.5;
};

/// Pooled ridge regression point head plus one pinball-loss linear head per
/// quantile level, all fitted on the pooled design matrix.
class PooledLinearModel final : public GlobalModel {
public:
    PooledLinearModel(FeatureSchema schema, std::vector<double> levels,
                      std::vector<double> point_coef,
                      std::vector<std::vector<double>> quantile_coef);

    ModelFamily family() const override { return ModelFamily::pooled_linear; }
    const FeatureSchema& schema() const override { return schema_; }
    const std::vector<double>& quantile_levels() const override { return levels_; }

    double predict_point(std::span<const double> row) const override;
    void predict_quantiles(std::span<const double> row, std::span<double> out) const override;

    /// Intercept first, then one coefficient per schema column.
    const std::vector<double>& point_coefficients() const { return point_coef_; }
    const std::vector<std::vector<double>>& quantile_coefficients() const { return quantile_coef_; }

private:
    FeatureSchema schema_;
    std::vector<double> levels_;
    std::vector<double> point_coef_;
    std::vector<std::vector<double>> quantile_coef_;
};

std::unique_ptr<PooledLinearModel> fit_pooled_linear(const FeatureMatrix& matrix,
                                                     const LinearFitOptions& options,
                                                     std::vector<double> quantile_levels);

/// Solves (XtX + lambda*I) beta = Xty via Cholesky; the first row/column is
/// the unpenalized intercept. Throws SingularSystem when lambda is 0 and the
/// system is rank-deficient.
std::vector<double> solve_ridge_normal_equations(const FeatureMatrix& matrix, double lambda);

}  // namespace retrainbench
