#include "retrainbench/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>

#include "retrainbench/errors.hpp"

namespace retrainbench {

const char* rank_metric_name(RankMetric m) { return m == RankMetric::rmsse ? "rmsse" : "smql"; }

namespace {

double gammln(double x) {
    static const double coef[6] = {76.18009172947146,  -86.50532032941677, 24.01409824083091,
                                   -1.231739572450155, 0.1208650973866179e-2, -0.5395239384953e-5};
    double y = x;
    double tmp = x + 5.5;
    tmp -= (x + 0.5) * std::log(tmp);
    double ser = 1.000000000190015;
    for (double c : coef) ser += c / ++y;
    return -tmp + std::log(2.5066282746310005 * ser / x);
}

// Lower regularized incomplete gamma P(a, x) by series expansion (x < a+1).
double gamma_p_series(double a, double x) {
    const double gln = gammln(a);
    double ap = a;
    double sum = 1.0 / a;
    double del = sum;
    for (int n = 0; n < 500; ++n) {
        ++ap;
        del *= x / ap;
        sum += del;
        if (std::abs(del) < std::abs(sum) * 1e-15) break;
    }
    return sum * std::exp(-x + a * std::log(x) - gln);
}

// Upper regularized incomplete gamma Q(a, x) by continued fraction (x >= a+1).
double gamma_q_cf(double a, double x) {
    const double gln = gammln(a);
    const double tiny = 1e-300;
    double b = x + 1.0 - a;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i <= 500; ++i) {
        const double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < 1e-15) break;
    }
    return std::exp(-x + a * std::log(x) - gln) * h;
}

}  // namespace

double chi_square_survival(double x, int dof) {
    if (dof < 1) throw IncompleteBlocks("chi-square needs at least 1 degree of freedom");
    if (x <= 0.0) return 1.0;
    const double a = 0.5 * static_cast<double>(dof);
    const double half = 0.5 * x;
    return half < a + 1.0 ? 1.0 - gamma_p_series(a, half) : gamma_q_cf(a, half);
}

double nemenyi_critical_value(int k, double alpha) {
    // Infinite-df studentized range quantiles divided by sqrt(2); the
    // standard two-tailed Nemenyi constants.
    static const double q05[] = {1.960, 2.343, 2.569, 2.728, 2.850, 2.949, 3.031, 3.102, 3.164,
                                 3.219, 3.268, 3.313, 3.354, 3.391, 3.426, 3.458, 3.489, 3.517,
                                 3.544};
    static const double q10[] = {1.645, 2.052, 2.291, 2.459, 2.589, 2.693, 2.780, 2.855, 2.920,
                                 2.978, 3.030, 3.077, 3.120, 3.159, 3.196, 3.230, 3.261, 3.291,
                                 3.319};
    if (k < 2 || k > 20) {
        throw IncompleteBlocks("Nemenyi constants tabulated for 2 <= k <= 20, got k=" +
                               std::to_string(k));
    }
    if (std::abs(alpha - 0.05) < 1e-12) return q05[k - 2];
    if (std::abs(alpha - 0.10) < 1e-12) return q10[k - 2];
    throw ConfigError("Nemenyi constants available for alpha of 0.05 or 0.10");
}

FriedmanResult friedman_on_table(const std::vector<std::vector<double>>& table,
                                 std::vector<int> scenarios, double alpha) {
    const std::size_t n_blocks = table.size();
    const std::size_t k = scenarios.size();
    if (k < 3) throw IncompleteBlocks("Friedman test needs k >= 3 scenarios");
    if (n_blocks < 2) throw IncompleteBlocks("Friedman test needs N >= 2 blocks");
    for (const auto& row : table) {
        if (row.size() != k) throw IncompleteBlocks("block row width does not match k");
    }

    FriedmanResult result;
    result.k = static_cast<int>(k);
    result.n_blocks = n_blocks;
    result.scenarios = std::move(scenarios);
    result.alpha = alpha;
    result.mean_ranks.assign(k, 0.0);

    std::vector<std::size_t> order(k);
    std::vector<double> ranks(k);
    for (const auto& row : table) {
        for (std::size_t j = 0; j < k; ++j) order[j] = j;
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return row[a] < row[b]; });
        // Average ranks over tied groups.
        std::size_t j = 0;
        while (j < k) {
            std::size_t j2 = j;
            while (j2 + 1 < k && row[order[j2 + 1]] == row[order[j]]) ++j2;
            const double avg_rank = 0.5 * static_cast<double>(j + j2) + 1.0;
            for (std::size_t m = j; m <= j2; ++m) ranks[order[m]] = avg_rank;
            j = j2 + 1;
        }
        for (std::size_t c = 0; c < k; ++c) result.mean_ranks[c] += ranks[c];
    }
    const double inv_n = 1.0 / static_cast<double>(n_blocks);
    for (double& r : result.mean_ranks) r *= inv_n;

    const double kd = static_cast<double>(k);
    const double nd = static_cast<double>(n_blocks);
    double spread = 0.0;
    for (double r : result.mean_ranks) {
        const double d = r - 0.5 * (kd + 1.0);
        spread += d * d;
    }
    result.chi_square = 12.0 * nd / (kd * (kd + 1.0)) * spread;
    result.p_value = chi_square_survival(result.chi_square, static_cast<int>(k) - 1);
    result.critical_difference =
        nemenyi_critical_value(static_cast<int>(k), alpha) * std::sqrt(kd * (kd + 1.0) / (6.0 * nd));

    result.rank_difference.assign(k, std::vector<double>(k, 0.0));
    result.significant.assign(k, std::vector<bool>(k, false));
    for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t j = 0; j < k; ++j) {
            const double diff = std::abs(result.mean_ranks[i] - result.mean_ranks[j]);
            result.rank_difference[i][j] = diff;
            result.significant[i][j] = i != j && diff > result.critical_difference;
        }
    }
    return result;
}

namespace {

/// Scenario columns usable for complete-block designs: families with zero
/// successful cells are ignored outright; the kept set is the intersection
/// of the successful scenarios of the remaining families (optionally of one
/// selected family). Dropped columns are appended to `dropped`.
std::vector<int> complete_scenarios(const MetricFrame& frame, std::vector<int>& dropped,
                                    std::optional<ModelFamily> family = std::nullopt) {
    std::map<ModelFamily, std::set<int>> ok_by_family;
    for (const auto& agg : frame.aggregates) {
        if (family && agg.family != *family) continue;
        if (!agg.failed) ok_by_family[agg.family].insert(agg.r);
    }
    std::vector<int> scenarios = frame.retrain_set;
    std::sort(scenarios.begin(), scenarios.end());
    std::vector<int> kept;
    for (int r : scenarios) {
        bool ok = !ok_by_family.empty();
        for (const auto& [f, set] : ok_by_family) {
            if (!set.count(r)) {
                ok = false;
                break;
            }
        }
        if (ok) {
            kept.push_back(r);
        } else {
            dropped.push_back(r);
        }
    }
    return kept;
}

double metric_of(const SeriesMetrics& detail, RankMetric metric) {
    return metric == RankMetric::rmsse ? detail.rmsse : detail.smql;
}

}  // namespace

FriedmanResult friedman_nemenyi(const MetricFrame& frame, RankMetric metric, double alpha,
                                std::optional<ModelFamily> family) {
    std::vector<int> dropped;
    const std::vector<int> scenarios = complete_scenarios(frame, dropped, family);
    if (scenarios.size() < 3) {
        throw IncompleteBlocks("fewer than 3 complete scenario columns for the Friedman test");
    }

    std::map<int, std::size_t> column;
    for (std::size_t j = 0; j < scenarios.size(); ++j) column[scenarios[j]] = j;

    // Blocks keyed by (family, series); values per scenario column.
    std::map<std::pair<int, std::uint32_t>, std::vector<double>> blocks;
    std::map<std::pair<int, std::uint32_t>, std::size_t> filled;
    for (const auto& detail : frame.series_detail) {
        if (family && detail.family != *family) continue;
        const auto it = column.find(detail.r);
        if (it == column.end()) continue;
        const auto key = std::make_pair(static_cast<int>(detail.family), detail.series);
        auto& row = blocks[key];
        if (row.empty()) row.assign(scenarios.size(), std::nan(""));
        row[it->second] = metric_of(detail, metric);
        filled[key] += 1;
    }

    std::vector<std::vector<double>> table;
    table.reserve(blocks.size());
    for (auto& [key, row] : blocks) {
        if (filled[key] != scenarios.size()) {
            throw IncompleteBlocks("block (" +
                                   std::string(family_name(static_cast<ModelFamily>(key.first))) +
                                   ", series " + std::to_string(key.second) +
                                   ") is missing scenario cells");
        }
        table.push_back(std::move(row));
    }

    FriedmanResult result = friedman_on_table(table, scenarios, alpha);
    result.dropped_scenarios = std::move(dropped);
    return result;
}

void CostModel::validate() const {
    if (rate_per_hour <= 0.0) throw ConfigError("cost rate_per_hour must be positive");
    if (n_series_dataset == 0) throw ConfigError("cost n_series_dataset must be positive");
    if (n_series_target == 0) throw ConfigError("cost n_series_target must be positive");
}

double cost_of_ct(double ct_wall_seconds, const CostModel& cost) {
    cost.validate();
    return ct_wall_seconds / 3600.0 * cost.rate_per_hour *
           (static_cast<double>(cost.n_series_target) /
            static_cast<double>(cost.n_series_dataset));
}

std::vector<ScenarioCost> cost_table(const MetricFrame& frame, const CostModel& cost) {
    cost.validate();
    std::vector<ScenarioCost> table;
    for (const auto& agg : frame.aggregates) {
        if (agg.failed) continue;
        const MetricAggregate* baseline = nullptr;
        for (const auto& other : frame.aggregates) {
            if (other.family == agg.family && other.r == frame.baseline_r && !other.failed) {
                baseline = &other;
                break;
            }
        }
        // Families whose baseline cell failed produce no cost rows.
        if (baseline == nullptr) continue;
        ScenarioCost row;
        row.family = agg.family;
        row.r = agg.r;
        row.cost = cost_of_ct(agg.ct_wall_seconds, cost);
        const double baseline_cost = cost_of_ct(baseline->ct_wall_seconds, cost);
        row.savings = 1.0 - row.cost / baseline_cost;
        table.push_back(row);
    }
    if (table.empty()) {
        throw MissingBaseline("no family has a successful baseline scenario r=" +
                              std::to_string(frame.baseline_r));
    }
    return table;
}

OptimalFrequencyTable optimal_frequency(const MetricFrame& frame, RankMetric metric,
                                        std::optional<ModelFamily> family) {
    std::vector<int> dropped;
    const std::vector<int> scenarios = complete_scenarios(frame, dropped, family);
    if (scenarios.empty()) throw IncompleteBlocks("no complete scenario columns");

    std::map<int, std::size_t> column;
    for (std::size_t j = 0; j < scenarios.size(); ++j) column[scenarios[j]] = j;

    // Per series: metric per scenario averaged over families.
    std::map<std::uint32_t, std::vector<double>> sums;
    std::map<std::uint32_t, std::vector<std::size_t>> counts;
    for (const auto& detail : frame.series_detail) {
        if (family && detail.family != *family) continue;
        const auto it = column.find(detail.r);
        if (it == column.end()) continue;
        auto& s = sums[detail.series];
        auto& c = counts[detail.series];
        if (s.empty()) {
            s.assign(scenarios.size(), 0.0);
            c.assign(scenarios.size(), 0);
        }
        s[it->second] += metric_of(detail, metric);
        c[it->second] += 1;
    }

    OptimalFrequencyTable table;
    table.metric = metric;
    table.scenarios = scenarios;
    table.histogram.assign(scenarios.size(), 0);
    for (auto& [series, s] : sums) {
        const auto& c = counts[series];
        std::size_t best = 0;
        double best_value = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < scenarios.size(); ++j) {
            if (c[j] == 0) throw IncompleteBlocks("series is missing a scenario average");
            const double value = s[j] / static_cast<double>(c[j]);
            if (value <= best_value) {  // ties resolve to the largest r
                best_value = value;
                best = j;
            }
        }
        table.series.push_back(series);
        table.r_star.push_back(scenarios[best]);
        table.histogram[best] += 1;
    }
    return table;
}

}  // namespace retrainbench
