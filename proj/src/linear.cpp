#include "retrainbench/linear.hpp"

#include <cmath>

#include "retrainbench/errors.hpp"

namespace retrainbench {

PooledLinearModel::PooledLinearModel(FeatureSchema schema, std::vector<double> levels,
                                     std::vector<double> point_coef,
                                     std::vector<std::vector<double>> quantile_coef)
    : schema_(std::move(schema)),
      levels_(std::move(levels)),
      point_coef_(std::move(point_coef)),
      quantile_coef_(std::move(quantile_coef)) {}

namespace {

double dot_with_intercept(const std::vector<double>& coef, std::span<const double> row) {
    double acc = coef[0];
    for (std::size_t j = 0; j < row.size(); ++j) acc += coef[j + 1] * row[j];
    return acc;
}

}  // namespace

double PooledLinearModel::predict_point(std::span<const double> row) const {
    check_row(row);
    return dot_with_intercept(point_coef_, row);
}

void PooledLinearModel::predict_quantiles(std::span<const double> row,
                                          std::span<double> out) const {
    check_row(row);
    for (std::size_t k = 0; k < quantile_coef_.size(); ++k) {
        out[k] = dot_with_intercept(quantile_coef_[k], row);
    }
}

std::vector<double> solve_ridge_normal_equations(const FeatureMatrix& matrix, double lambda) {
    if (matrix.n_rows == 0) throw SingularSystem("empty design matrix");
    const std::size_t p = matrix.n_cols + 1;  // intercept first

    std::vector<double> a(p * p, 0.0);
    std::vector<double> b(p, 0.0);
    std::vector<double> xtilde(p);
    for (std::size_t r = 0; r < matrix.n_rows; ++r) {
        const auto row = matrix.row(r);
        xtilde[0] = 1.0;
        for (std::size_t j = 0; j < matrix.n_cols; ++j) xtilde[j + 1] = row[j];
        for (std::size_t i = 0; i < p; ++i) {
            const double xi = xtilde[i];
            if (xi == 0.0) continue;
            for (std::size_t j = i; j < p; ++j) a[i * p + j] += xi * xtilde[j];
            b[i] += xi * matrix.y[r];
        }
    }
    for (std::size_t j = 1; j < p; ++j) a[j * p + j] += lambda;  // intercept unpenalized
    for (std::size_t i = 0; i < p; ++i) {
        for (std::size_t j = 0; j < i; ++j) a[i * p + j] = a[j * p + i];
    }

    // Cholesky factorization A = L L^T.
    std::vector<double> l(p * p, 0.0);
    double diag_scale = 0.0;
    for (std::size_t i = 0; i < p; ++i) diag_scale = std::max(diag_scale, a[i * p + i]);
    const double tol = 1e-12 * std::max(diag_scale, 1.0);
    for (std::size_t i = 0; i < p; ++i) {
        for (std::size_t j = 0; j <= i; ++j) {
            double s = a[i * p + j];
            for (std::size_t k = 0; k < j; ++k) s -= l[i * p + k] * l[j * p + k];
            if (i == j) {
                if (s <= tol) {
                    throw SingularSystem(
                        "design matrix is rank-deficient (column " + std::to_string(j) +
                        "); set ridge_lambda > 0 or drop collinear features");
                }
                l[i * p + i] = std::sqrt(s);
            } else {
                l[i * p + j] = s / l[j * p + j];
            }
        }
    }

    // L z = b, then L^T beta = z.
    std::vector<double> z(p);
    for (std::size_t i = 0; i < p; ++i) {
        double s = b[i];
        for (std::size_t k = 0; k < i; ++k) s -= l[i * p + k] * z[k];
        z[i] = s / l[i * p + i];
    }
    std::vector<double> beta(p);
    for (std::size_t ii = p; ii-- > 0;) {
        double s = z[ii];
        for (std::size_t k = ii + 1; k < p; ++k) s -= l[k * p + ii] * beta[k];
        beta[ii] = s / l[ii * p + ii];
    }
    return beta;
}

namespace {

struct ColumnScaler {
    std::vector<double> mean;
    std::vector<double> stddev;
    double y_mean = 0.0;
    double y_stddev = 1.0;
};

ColumnScaler fit_scaler(const FeatureMatrix& matrix) {
    ColumnScaler s;
    const std::size_t p = matrix.n_cols;
    const auto n = static_cast<double>(matrix.n_rows);
    s.mean.assign(p, 0.0);
    s.stddev.assign(p, 0.0);
    for (std::size_t r = 0; r < matrix.n_rows; ++r) {
        const auto row = matrix.row(r);
        for (std::size_t j = 0; j < p; ++j) s.mean[j] += row[j];
        s.y_mean += matrix.y[r];
    }
    for (std::size_t j = 0; j < p; ++j) s.mean[j] /= n;
    s.y_mean /= n;
    double y_var = 0.0;
    for (std::size_t r = 0; r < matrix.n_rows; ++r) {
        const auto row = matrix.row(r);
        for (std::size_t j = 0; j < p; ++j) {
            const double d = row[j] - s.mean[j];
            s.stddev[j] += d * d;
        }
        const double dy = matrix.y[r] - s.y_mean;
        y_var += dy * dy;
    }
    for (std::size_t j = 0; j < p; ++j) {
        s.stddev[j] = std::sqrt(s.stddev[j] / n);
        if (s.stddev[j] <= 0.0) s.stddev[j] = 1.0;
    }
    s.y_stddev = std::sqrt(y_var / n);
    if (s.y_stddev <= 0.0) s.y_stddev = 1.0;
    return s;
}

/// Full-batch pinball subgradient descent in standardized coordinates,
/// warm-started from the ridge solution. Returns raw-space coefficients
/// (intercept first).
std::vector<double> fit_quantile_head(const FeatureMatrix& matrix,
                                      const std::vector<double>& std_x,
                                      const ColumnScaler& scaler,
                                      const std::vector<double>& ridge_coef, double q,
                                      const LinearFitOptions& options) {
    const std::size_t p = matrix.n_cols;
    const std::size_t n = matrix.n_rows;

    // Map the ridge warm start into standardized space.
    std::vector<double> beta(p + 1);
    double b0 = ridge_coef[0];
    for (std::size_t j = 0; j < p; ++j) {
        beta[j + 1] = ridge_coef[j + 1] * scaler.stddev[j] / scaler.y_stddev;
        b0 += ridge_coef[j + 1] * scaler.mean[j];
    }
    beta[0] = (b0 - scaler.y_mean) / scaler.y_stddev;

    std::vector<double> grad(p + 1);
    for (int epoch = 1; epoch <= options.quantile_epochs; ++epoch) {
        std::fill(grad.begin(), grad.end(), 0.0);
        for (std::size_t r = 0; r < n; ++r) {
            const double* u = std_x.data() + r * p;
            double f = beta[0];
            for (std::size_t j = 0; j < p; ++j) f += beta[j + 1] * u[j];
            const double z = (matrix.y[r] - scaler.y_mean) / scaler.y_stddev;
            double dl;
            if (z > f) {
                dl = -q;
            } else if (z < f) {
                dl = 1.0 - q;
            } else {
                continue;
            }
            grad[0] += dl;
            for (std::size_t j = 0; j < p; ++j) grad[j + 1] += dl * u[j];
        }
        const double step =
            options.quantile_learning_rate / (std::sqrt(static_cast<double>(epoch)) *
                                              static_cast<double>(n));
        for (std::size_t j = 0; j <= p; ++j) beta[j] -= step * grad[j];
    }

    // Unfold standardization back into raw coefficients.
    std::vector<double> coef(p + 1);
    double intercept = scaler.y_mean + scaler.y_stddev * beta[0];
    for (std::size_t j = 0; j < p; ++j) {
        coef[j + 1] = beta[j + 1] * scaler.y_stddev / scaler.stddev[j];
        intercept -= coef[j + 1] * scaler.mean[j];
    }
    coef[0] = intercept;
    return coef;
}

}  // namespace

std::unique_ptr<PooledLinearModel> fit_pooled_linear(const FeatureMatrix& matrix,
                                                     const LinearFitOptions& options,
                                                     std::vector<double> quantile_levels) {
    if (matrix.n_rows == 0 || matrix.n_cols == 0) {
        throw SingularSystem("cannot fit on an empty feature matrix");
    }
    if (options.ridge_lambda < 0.0) throw ConfigError("ridge_lambda must be >= 0");

    std::vector<double> point_coef = solve_ridge_normal_equations(matrix, options.ridge_lambda);

    const ColumnScaler scaler = fit_scaler(matrix);
    std::vector<double> std_x(matrix.n_rows * matrix.n_cols);
    for (std::size_t r = 0; r < matrix.n_rows; ++r) {
        const auto row = matrix.row(r);
        for (std::size_t j = 0; j < matrix.n_cols; ++j) {
            std_x[r * matrix.n_cols + j] = (row[j] - scaler.mean[j]) / scaler.stddev[j];
        }
    }

    std::vector<std::vector<double>> quantile_coef;
    quantile_coef.reserve(quantile_levels.size());
    for (double q : quantile_levels) {
        quantile_coef.push_back(fit_quantile_head(matrix, std_x, scaler, point_coef, q, options));
    }

    return std::make_unique<PooledLinearModel>(matrix.schema, std::move(quantile_levels),
                                               std::move(point_coef), std::move(quantile_coef));
}

}  // namespace retrainbench
