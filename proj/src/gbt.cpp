#include "retrainbench/gbt.hpp"

#include <algorithm>
#include <cmath>

#include "retrainbench/errors.hpp"

namespace retrainbench {

void GbtParams::validate() const {
    if (n_trees < 1) throw ConfigError("gbt n_trees must be >= 1");
    if (learning_rate <= 0.0) throw ConfigError("gbt learning_rate must be positive");
    if (max_depth < 0) throw ConfigError("gbt max_depth must be >= 0");
    if (min_leaf < 1) throw ConfigError("gbt min_leaf must be >= 1");
    if (n_bins < 2) throw ConfigError("gbt n_bins must be >= 2");
}

double empirical_quantile(std::vector<double> values, double q) {
    if (values.empty()) return 0.0;
    std::sort(values.begin(), values.end());
    const auto n = static_cast<double>(values.size());
    auto idx = static_cast<std::ptrdiff_t>(std::ceil(q * n)) - 1;
    idx = std::clamp<std::ptrdiff_t>(idx, 0, static_cast<std::ptrdiff_t>(values.size()) - 1);
    return values[static_cast<std::size_t>(idx)];
}

double GbtBooster::predict_raw(std::span<const double> row) const {
    double acc = base_score;
    for (const auto& tree : trees) {
        int node = 0;
        while (tree[static_cast<std::size_t>(node)].feature >= 0) {
            const GbtTreeNode& n = tree[static_cast<std::size_t>(node)];
            node = row[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right;
        }
        acc += learning_rate * tree[static_cast<std::size_t>(node)].value;
    }
    return acc;
}

namespace {

double pinball(double y, double f, double q) {
    return y >= f ? q * (y - f) : (1.0 - q) * (f - y);
}

double mean_loss(const std::vector<double>& y, const std::vector<double>& f, GbtLoss loss) {
    double acc = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        if (loss.kind == GbtLoss::Kind::squared) {
            const double d = y[i] - f[i];
            acc += d * d;
        } else {
            acc += pinball(y[i], f[i], loss.q);
        }
    }
    return acc / static_cast<double>(y.size());
}

/// Per-feature histogram quantization: bin edges at evenly spaced order
/// statistics, deduplicated. bin(x) = index of the first edge >= x, with
/// values above the last edge in the overflow bin.
struct BinnedMatrix {
    std::size_t n_rows = 0;
    std::size_t n_features = 0;
    std::vector<std::vector<double>> edges;  // per feature, ascending
    std::vector<std::uint16_t> bins;         // row-major

    std::uint16_t bin_of(std::size_t r, std::size_t f) const { return bins[r * n_features + f]; }
};

BinnedMatrix quantize(const FeatureMatrix& matrix, int n_bins) {
    BinnedMatrix binned;
    binned.n_rows = matrix.n_rows;
    binned.n_features = matrix.n_cols;
    binned.edges.resize(matrix.n_cols);
    binned.bins.resize(matrix.n_rows * matrix.n_cols);

    std::vector<double> column(matrix.n_rows);
    for (std::size_t f = 0; f < matrix.n_cols; ++f) {
        for (std::size_t r = 0; r < matrix.n_rows; ++r) column[r] = matrix.x[r * matrix.n_cols + f];
        std::sort(column.begin(), column.end());
        auto& edges = binned.edges[f];
        for (int b = 1; b < n_bins; ++b) {
            const auto pos = static_cast<std::size_t>(
                static_cast<std::uint64_t>(b) * matrix.n_rows / static_cast<std::uint64_t>(n_bins));
            const double edge = column[std::min(pos, matrix.n_rows - 1)];
            if (edges.empty() || edge > edges.back()) edges.push_back(edge);
        }
        for (std::size_t r = 0; r < matrix.n_rows; ++r) {
            const double x = matrix.x[r * matrix.n_cols + f];
            const auto it = std::lower_bound(edges.begin(), edges.end(), x);
            binned.bins[r * matrix.n_cols + f] =
                static_cast<std::uint16_t>(it - edges.begin());
        }
    }
    return binned;
}

struct SplitChoice {
    bool found = false;
    std::size_t feature = 0;
    std::uint16_t bin = 0;  // left gets bins <= bin
    double gain = 0.0;
};

/// Variance-reduction split search over histogram bins of the gradient
/// targets. Ties resolve to the first (feature, bin) in scan order.
SplitChoice best_split(const BinnedMatrix& binned, const std::vector<std::uint32_t>& rows,
                       const std::vector<double>& target, int min_leaf) {
    SplitChoice choice;
    const auto n = static_cast<double>(rows.size());
    double total = 0.0;
    for (std::uint32_t r : rows) total += target[r];
    const double parent_score = total * total / n;

    std::vector<double> bin_sum;
    std::vector<std::uint32_t> bin_count;
    for (std::size_t f = 0; f < binned.n_features; ++f) {
        const std::size_t n_edge_bins = binned.edges[f].size() + 1;
        if (n_edge_bins < 2) continue;
        bin_sum.assign(n_edge_bins, 0.0);
        bin_count.assign(n_edge_bins, 0);
        for (std::uint32_t r : rows) {
            const std::uint16_t b = binned.bin_of(r, f);
            bin_sum[b] += target[r];
            bin_count[b] += 1;
        }
        double left_sum = 0.0;
        std::uint32_t left_count = 0;
        for (std::size_t b = 0; b + 1 < n_edge_bins; ++b) {
            left_sum += bin_sum[b];
            left_count += bin_count[b];
            const std::uint32_t right_count = static_cast<std::uint32_t>(rows.size()) - left_count;
            if (left_count < static_cast<std::uint32_t>(min_leaf)) continue;
            if (right_count < static_cast<std::uint32_t>(min_leaf)) break;
            const double right_sum = total - left_sum;
            const double score = left_sum * left_sum / static_cast<double>(left_count) +
                                 right_sum * right_sum / static_cast<double>(right_count);
            const double gain = score - parent_score;
            if (gain > choice.gain + 1e-12) {
                choice.found = true;
                choice.feature = f;
                choice.bin = static_cast<std::uint16_t>(b);
                choice.gain = gain;
            }
        }
    }
    return choice;
}

struct PendingNode {
    int node_index;
    int depth;
    std::vector<std::uint32_t> rows;
};

}  // namespace

GbtBooster fit_gbt_booster(const FeatureMatrix& matrix, const GbtParams& params, GbtLoss loss) {
    params.validate();
    if (matrix.n_rows == 0) throw ConfigError("cannot fit gbt on an empty matrix");

    GbtBooster booster;
    booster.loss = loss;
    booster.learning_rate = params.learning_rate;

    const std::size_t n = matrix.n_rows;
    if (loss.kind == GbtLoss::Kind::squared) {
        double mean = 0.0;
        for (double v : matrix.y) mean += v;
        booster.base_score = mean / static_cast<double>(n);
    } else {
        booster.base_score = empirical_quantile(matrix.y, loss.q);
    }

    std::vector<double> f(n, booster.base_score);
    booster.train_loss.push_back(mean_loss(matrix.y, f, loss));

    const BinnedMatrix binned = quantize(matrix, params.n_bins);

    std::vector<double> gradient_target(n);
    std::vector<double> residual(n);
    for (int t = 0; t < params.n_trees; ++t) {
        for (std::size_t i = 0; i < n; ++i) {
            residual[i] = matrix.y[i] - f[i];
            if (loss.kind == GbtLoss::Kind::squared) {
                gradient_target[i] = residual[i];
            } else {
                gradient_target[i] = residual[i] > 0.0 ? loss.q
                                     : residual[i] < 0.0 ? -(1.0 - loss.q)
                                                         : 0.0;
            }
        }

        std::vector<GbtTreeNode> tree;
        std::vector<PendingNode> stack;
        {
            std::vector<std::uint32_t> all(n);
            for (std::size_t i = 0; i < n; ++i) all[i] = static_cast<std::uint32_t>(i);
            tree.push_back(GbtTreeNode{});
            stack.push_back(PendingNode{0, 0, std::move(all)});
        }

        std::vector<double> leaf_values;  // parallel to leaf rows assignment below
        while (!stack.empty()) {
            PendingNode node = std::move(stack.back());
            stack.pop_back();

            SplitChoice split;
            if (node.depth < params.max_depth &&
                node.rows.size() >= 2 * static_cast<std::size_t>(params.min_leaf)) {
                split = best_split(binned, node.rows, gradient_target, params.min_leaf);
            }

            if (!split.found) {
                // Leaf: line search on the true residuals.
                double value;
                if (loss.kind == GbtLoss::Kind::squared) {
                    double s = 0.0;
                    for (std::uint32_t r : node.rows) s += residual[r];
                    value = s / static_cast<double>(node.rows.size());
                } else {
                    std::vector<double> leaf_res;
                    leaf_res.reserve(node.rows.size());
                    for (std::uint32_t r : node.rows) leaf_res.push_back(residual[r]);
                    value = empirical_quantile(std::move(leaf_res), loss.q);
                }
                auto& leaf = tree[static_cast<std::size_t>(node.node_index)];
                leaf.feature = -1;
                leaf.value = value;
                for (std::uint32_t r : node.rows) f[r] += params.learning_rate * value;
                continue;
            }

            std::vector<std::uint32_t> left_rows;
            std::vector<std::uint32_t> right_rows;
            left_rows.reserve(node.rows.size());
            right_rows.reserve(node.rows.size());
            for (std::uint32_t r : node.rows) {
                if (binned.bin_of(r, split.feature) <= split.bin) {
                    left_rows.push_back(r);
                } else {
                    right_rows.push_back(r);
                }
            }

            const int left_index = static_cast<int>(tree.size());
            tree.push_back(GbtTreeNode{});
            const int right_index = static_cast<int>(tree.size());
            tree.push_back(GbtTreeNode{});

            auto& parent = tree[static_cast<std::size_t>(node.node_index)];
            parent.feature = static_cast<int>(split.feature);
            parent.threshold = binned.edges[split.feature][split.bin];
            parent.left = left_index;
            parent.right = right_index;

            stack.push_back(PendingNode{right_index, node.depth + 1, std::move(right_rows)});
            stack.push_back(PendingNode{left_index, node.depth + 1, std::move(left_rows)});
        }

        booster.trees.push_back(std::move(tree));
        booster.train_loss.push_back(mean_loss(matrix.y, f, loss));
    }
    return booster;
}

GbtModel::GbtModel(FeatureSchema schema, std::vector<double> levels, GbtBooster point,
                   std::vector<GbtBooster> quantile_heads)
    : schema_(std::move(schema)),
      levels_(std::move(levels)),
      point_(std::move(point)),
      quantile_heads_(std::move(quantile_heads)) {}

double GbtModel::predict_point(std::span<const double> row) const {
    check_row(row);
    return point_.predict_raw(row);
}

void GbtModel::predict_quantiles(std::span<const double> row, std::span<double> out) const {
    check_row(row);
    for (std::size_t k = 0; k < quantile_heads_.size(); ++k) {
        out[k] = quantile_heads_[k].predict_raw(row);
    }
}

std::unique_ptr<GbtModel> fit_gbt(const FeatureMatrix& matrix, const GbtParams& params,
                                  std::vector<double> quantile_levels) {
    GbtBooster point = fit_gbt_booster(matrix, params, GbtLoss::squared());
    std::vector<GbtBooster> heads;
    heads.reserve(quantile_levels.size());
    for (double q : quantile_levels) {
        heads.push_back(fit_gbt_booster(matrix, params, GbtLoss::pinball(q)));
    }
    return std::make_unique<GbtModel>(matrix.schema, std::move(quantile_levels), std::move(point),
                                      std::move(heads));
}

}  // namespace retrainbench
