// Independent brute-force oracles used by the unit and acceptance suites.
// These deliberately avoid every code path of the library implementations
// they check: plain loops, Gaussian elimination, sort-based ranks.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace oracles {

// Direct evaluation of the scaled point metric: sqrt(mean squared forecast
// error / mean squared seasonal-naive in-sample error).
inline double rmsse(const std::vector<double>& actuals, const std::vector<double>& forecasts,
                    const std::vector<double>& train, int s) {
    double num = 0.0;
    for (std::size_t t = 0; t < actuals.size(); ++t) {
        num += (actuals[t] - forecasts[t]) * (actuals[t] - forecasts[t]);
    }
    num /= static_cast<double>(actuals.size());
    double den = 0.0;
    for (std::size_t t = static_cast<std::size_t>(s); t < train.size(); ++t) {
        den += (train[t] - train[t - static_cast<std::size_t>(s)]) *
               (train[t] - train[t - static_cast<std::size_t>(s)]);
    }
    den /= static_cast<double>(train.size() - static_cast<std::size_t>(s));
    return std::sqrt(num / den);
}

inline double sql(const std::vector<double>& actuals, const std::vector<double>& qf, double q,
                  const std::vector<double>& train, int s) {
    double num = 0.0;
    for (std::size_t t = 0; t < actuals.size(); ++t) {
        const double y = actuals[t];
        const double f = qf[t];
        num += y >= f ? q * (y - f) : (1.0 - q) * (f - y);
    }
    num /= static_cast<double>(actuals.size());
    double den = 0.0;
    for (std::size_t t = static_cast<std::size_t>(s); t < train.size(); ++t) {
        den += std::abs(train[t] - train[t - static_cast<std::size_t>(s)]);
    }
    den /= static_cast<double>(train.size() - static_cast<std::size_t>(s));
    return num / den;
}

inline double smql(const std::vector<double>& actuals,
                   const std::vector<std::vector<double>>& qf_by_level,
                   const std::vector<double>& levels, const std::vector<double>& train, int s) {
    double acc = 0.0;
    for (std::size_t k = 0; k < levels.size(); ++k) {
        acc += sql(actuals, qf_by_level[k], levels[k], train, s);
    }
    return acc / static_cast<double>(levels.size());
}

// Dense solve of (X~^T X~ + lambda D) beta = X~^T y by Gaussian elimination
// with partial pivoting; X~ carries an implicit leading 1 column and D has a
// zero in the intercept slot.
inline std::vector<double> ridge_by_gaussian_elimination(const std::vector<std::vector<double>>& x,
                                                         const std::vector<double>& y,
                                                         double lambda) {
    const std::size_t n = x.size();
    const std::size_t p = x.front().size() + 1;
    std::vector<std::vector<double>> a(p, std::vector<double>(p + 1, 0.0));
    for (std::size_t r = 0; r < n; ++r) {
        std::vector<double> xt(p);
        xt[0] = 1.0;
        for (std::size_t j = 1; j < p; ++j) xt[j] = x[r][j - 1];
        for (std::size_t i = 0; i < p; ++i) {
            for (std::size_t j = 0; j < p; ++j) a[i][j] += xt[i] * xt[j];
            a[i][p] += xt[i] * y[r];
        }
    }
    for (std::size_t j = 1; j < p; ++j) a[j][j] += lambda;

    for (std::size_t col = 0; col < p; ++col) {
        std::size_t pivot = col;
        for (std::size_t r = col + 1; r < p; ++r) {
            if (std::abs(a[r][col]) > std::abs(a[pivot][col])) pivot = r;
        }
        if (std::abs(a[pivot][col]) < 1e-12) throw std::runtime_error("singular oracle system");
        std::swap(a[col], a[pivot]);
        for (std::size_t r = 0; r < p; ++r) {
            if (r == col) continue;
            const double factor = a[r][col] / a[col][col];
            for (std::size_t j = col; j <= p; ++j) a[r][j] -= factor * a[col][j];
        }
    }
    std::vector<double> beta(p);
    for (std::size_t j = 0; j < p; ++j) beta[j] = a[j][p] / a[j][j];
    return beta;
}

// Sort-based empirical quantile, inverted-CDF convention.
inline double sort_quantile(std::vector<double> values, double q) {
    std::sort(values.begin(), values.end());
    auto idx = static_cast<std::ptrdiff_t>(std::ceil(q * static_cast<double>(values.size()))) - 1;
    idx = std::clamp<std::ptrdiff_t>(idx, 0, static_cast<std::ptrdiff_t>(values.size()) - 1);
    return values[static_cast<std::size_t>(idx)];
}

struct FriedmanOracle {
    std::vector<double> mean_ranks;
    double chi_square;
};

// Friedman statistic via the rank-sum formula chi2 = 12/(N k (k+1)) * sum R_j^2
// - 3 N (k+1), an algebraic route different from the implementation's
// spread-around-mean form.
inline FriedmanOracle friedman(const std::vector<std::vector<double>>& table) {
    const std::size_t n = table.size();
    const std::size_t k = table.front().size();
    std::vector<double> rank_sum(k, 0.0);
    for (const auto& row : table) {
        for (std::size_t j = 0; j < k; ++j) {
            double rank = 1.0;
            double ties = 0.0;
            for (std::size_t m = 0; m < k; ++m) {
                if (m == j) continue;
                if (row[m] < row[j]) rank += 1.0;
                if (row[m] == row[j]) ties += 1.0;
            }
            rank_sum[j] += rank + ties / 2.0;
        }
    }
    FriedmanOracle out;
    out.mean_ranks.resize(k);
    for (std::size_t j = 0; j < k; ++j) {
        out.mean_ranks[j] = rank_sum[j] / static_cast<double>(n);
    }
    double sum_sq = 0.0;
    for (double r : rank_sum) sum_sq += r * r;
    const double nd = static_cast<double>(n);
    const double kd = static_cast<double>(k);
    out.chi_square = 12.0 / (nd * kd * (kd + 1.0)) * sum_sq - 3.0 * nd * (kd + 1.0);
    return out;
}

}  // namespace oracles
