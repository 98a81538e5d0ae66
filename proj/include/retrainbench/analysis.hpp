#pragma once

#include <optional>

#include "retrainbench/metrics.hpp"

namespace retrainbench {

enum class RankMetric { rmsse, smql };
const char* rank_metric_name(RankMetric m);

struct FriedmanResult {
    int k = 0;                          // scenarios compared
    std::size_t n_blocks = 0;           // N
    std::vector<int> scenarios;         // retrain values, ascending
    std::vector<double> mean_ranks;     // per scenario
    double chi_square = 0.0;
    double p_value = 1.0;
    double critical_difference = 0.0;   // Nemenyi CD at alpha
    double alpha = 0.05;
    std::vector<std::vector<double>> rank_difference;   // |Ri - Rj|
    std::vector<std::vector<bool>> significant;         // |Ri - Rj| > CD
    std::vector<int> dropped_scenarios;                 // incomplete columns removed
};

/// Friedman test over blocks (one per model x series, or per series of a
/// single family when `family` is set) with average ranks for ties,
/// chi-square on k-1 degrees of freedom, and the Nemenyi critical difference
/// q_alpha * sqrt(k (k+1) / (6 N)). Scenario columns with failed cells are
/// dropped and recorded.
FriedmanResult friedman_nemenyi(const MetricFrame& frame, RankMetric metric, double alpha,
                                std::optional<ModelFamily> family = std::nullopt);

/// Friedman test on a raw table: one row per block, one column per scenario.
FriedmanResult friedman_on_table(const std::vector<std::vector<double>>& table,
                                 std::vector<int> scenarios, double alpha);

/// Upper tail of the chi-square distribution (regularized incomplete gamma).
double chi_square_survival(double x, int dof);

/// Two-tailed Nemenyi critical value (infinite-df studentized range / sqrt 2)
/// for alpha in {0.05, 0.10} and k in [2, 20].
double nemenyi_critical_value(int k, double alpha);

struct CostModel {
    double rate_per_hour = 3.5;
    std::size_t n_series_dataset = 1;
    std::size_t n_series_target = 1000000;
    std::string currency = "USD";

    void validate() const;
};

struct ScenarioCost {
    ModelFamily family;
    int r;
    double cost = 0.0;     // currency units for the extrapolated fleet
    double savings = 0.0;  // 1 - cost / baseline cost, 0 at the baseline
};

double cost_of_ct(double ct_wall_seconds, const CostModel& cost);

/// Cost and savings-vs-baseline per (family, scenario); savings of the
/// baseline scenario are exactly zero. Throws MissingBaseline when a family
/// has no usable baseline cell.
std::vector<ScenarioCost> cost_table(const MetricFrame& frame, const CostModel& cost);

struct OptimalFrequencyTable {
    RankMetric metric;
    std::vector<int> scenarios;
    std::vector<std::uint32_t> series;          // panel series index
    std::vector<int> r_star;                    // per series
    std::vector<std::size_t> histogram;         // counts per scenario
};

/// Per-series argmin of the across-origin average metric, averaged over
/// model families unless one is selected; ties break toward the largest r
/// (cheapest schedule).
OptimalFrequencyTable optimal_frequency(const MetricFrame& frame, RankMetric metric,
                                        std::optional<ModelFamily> family = std::nullopt);

}  // namespace retrainbench
