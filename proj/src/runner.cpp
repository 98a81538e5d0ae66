#include "retrainbench/runner.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <map>

#include <nlohmann/json.hpp>

#include "retrainbench/csv.hpp"
#include "retrainbench/errors.hpp"
#include "retrainbench/version.hpp"

namespace retrainbench {

namespace {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

json friedman_to_json(const FriedmanResult& result) {
    json j;
    j["k"] = result.k;
    j["n_blocks"] = result.n_blocks;
    j["scenarios"] = result.scenarios;
    j["mean_ranks"] = result.mean_ranks;
    j["chi_square"] = result.chi_square;
    j["p_value"] = result.p_value;
    j["alpha"] = result.alpha;
    j["critical_difference"] = result.critical_difference;
    json pairs = json::array();
    for (std::size_t i = 0; i < result.significant.size(); ++i) {
        for (std::size_t jj = i + 1; jj < result.significant[i].size(); ++jj) {
            if (result.significant[i][jj]) {
                pairs.push_back({result.scenarios[i], result.scenarios[jj]});
            }
        }
    }
    j["significant_pairs"] = std::move(pairs);
    j["dropped_scenarios"] = result.dropped_scenarios;
    return j;
}

}  // namespace

TimeSeriesPanel materialize_panel(const RunConfig& config) {
    if (config.dataset_source == "synthetic") {
        TimeSeriesPanel panel = generate_synthetic(config.synthetic);
        return filter_min_length(panel, config.min_obs);
    }
    TimeSeriesPanel panel =
        ingest_csv(config.demand_csv, config.statics_csv, config.calendar_csv, config.frequency);
    return filter_min_length(panel, config.min_obs);
}

void write_forecasts_csv(const std::vector<BacktestRun>& runs, const TimeSeriesPanel& panel,
                         const BacktestConfig& config, const std::vector<double>& levels,
                         const std::string& path) {
    std::ofstream out(path);
    if (!out) throw MalformedRow("cannot open for writing: " + path);
    out << "model,r,unique_id,origin_ds,target_ds,step,point";
    for (double q : levels) out << ",q" << quantile_level_text(q);
    out << '\n';
    const int step_days = frequency_step_days(config.frequency);
    for (const auto& run : runs) {
        if (run.failed) continue;
        for (const auto& record : run.forecasts) {
            const DayNumber origin_ds = panel.timestamps()[static_cast<std::size_t>(record.origin)];
            out << family_name(run.family) << ',' << run.r << ','
                << panel.series_ids()[record.series] << ',' << format_date(origin_ds) << ','
                << format_date(origin_ds + static_cast<DayNumber>(record.step) * step_days) << ','
                << record.step << ',' << format_double(record.point);
            for (double v : record.quantiles) out << ',' << format_double(v);
            out << '\n';
        }
    }
}

void write_fits_csv(const std::vector<BacktestRun>& runs, const TimeSeriesPanel& panel,
                    const std::string& path) {
    std::ofstream out(path);
    if (!out) throw MalformedRow("cannot open for writing: " + path);
    out << "model,r,origin_ds,wall_s,cpu_s,train_rows\n";
    for (const auto& run : runs) {
        if (run.failed) continue;
        for (const auto& event : run.fit_events) {
            out << family_name(run.family) << ',' << run.r << ','
                << format_date(panel.timestamps()[static_cast<std::size_t>(event.origin)]) << ','
                << format_double(event.wall_seconds) << ',' << format_double(event.cpu_seconds)
                << ',' << event.train_rows << '\n';
        }
    }
}

void write_metrics_csv(const MetricFrame& frame, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw MalformedRow("cannot open for writing: " + path);
    out << "model,r,mean_rmsse,mean_smql,ct_wall_s,rel_rmsse,rel_smql,rel_ct,n_series,"
           "n_excluded\n";
    for (const auto& agg : frame.aggregates) {
        out << family_name(agg.family) << ',' << agg.r << ',' << format_double(agg.mean_rmsse)
            << ',' << format_double(agg.mean_smql) << ',' << format_double(agg.ct_wall_seconds)
            << ',' << format_double(agg.rel_rmsse) << ',' << format_double(agg.rel_smql) << ','
            << format_double(agg.rel_ct) << ',' << agg.n_series << ',' << agg.n_excluded << '\n';
    }
}

void write_metrics_detail_csv(const MetricFrame& frame, const TimeSeriesPanel& panel,
                              const std::string& path) {
    std::ofstream out(path);
    if (!out) throw MalformedRow("cannot open for writing: " + path);
    out << "model,r,unique_id,rmsse,smql";
    for (double q : frame.quantile_levels) out << ",sql" << quantile_level_text(q);
    out << '\n';
    for (const auto& detail : frame.series_detail) {
        out << family_name(detail.family) << ',' << detail.r << ','
            << panel.series_ids()[detail.series] << ',' << format_double(detail.rmsse) << ','
            << format_double(detail.smql);
        for (double v : detail.sql) out << ',' << format_double(v);
        out << '\n';
    }
}

void write_stats_json(const MetricFrame& frame, double alpha,
                      const std::vector<ModelFamily>& families, const std::string& path) {
    json root;
    root["alpha"] = alpha;
    root["blocks"] = "model_x_series";
    for (RankMetric metric : {RankMetric::rmsse, RankMetric::smql}) {
        try {
            root[rank_metric_name(metric)] = friedman_to_json(friedman_nemenyi(frame, metric, alpha));
        } catch (const Error& e) {
            root[rank_metric_name(metric)] = json{{"error", e.what()}};
        }
    }
    json per_family;
    for (ModelFamily family : families) {
        json entry;
        for (RankMetric metric : {RankMetric::rmsse, RankMetric::smql}) {
            try {
                entry[rank_metric_name(metric)] =
                    friedman_to_json(friedman_nemenyi(frame, metric, alpha, family));
            } catch (const Error& e) {
                entry[rank_metric_name(metric)] = json{{"error", e.what()}};
            }
        }
        per_family[family_name(family)] = std::move(entry);
    }
    root["per_family"] = std::move(per_family);
    root["excluded_series"] = frame.excluded_series;

    std::ofstream out(path);
    if (!out) throw MalformedRow("cannot open for writing: " + path);
    out << root.dump(2) << '\n';
}

void write_cost_csv(const std::vector<ScenarioCost>& costs, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw MalformedRow("cannot open for writing: " + path);
    out << "model,r,cost,savings\n";
    for (const auto& row : costs) {
        out << family_name(row.family) << ',' << row.r << ',' << format_double(row.cost) << ','
            << format_double(row.savings) << '\n';
    }
}

void write_optimal_csv(const OptimalFrequencyTable& rmsse_table,
                       const OptimalFrequencyTable& smql_table, const TimeSeriesPanel& panel,
                       const std::string& path) {
    if (rmsse_table.series != smql_table.series) {
        throw IncompatibleRuns("optimal-frequency tables cover different series");
    }
    std::ofstream out(path);
    if (!out) throw MalformedRow("cannot open for writing: " + path);
    out << "unique_id,r_star_rmsse,r_star_smql\n";
    for (std::size_t i = 0; i < rmsse_table.series.size(); ++i) {
        out << panel.series_ids()[rmsse_table.series[i]] << ',' << rmsse_table.r_star[i] << ','
            << smql_table.r_star[i] << '\n';
    }
}

RunOutcome run_from_config(const RunConfig& config) {
    RunOutcome outcome;
    outcome.warnings = config.validate();
    outcome.output_dir = config.output_dir;

    const fs::path dir(config.output_dir);
    fs::create_directories(dir);

    const auto run_start = std::chrono::steady_clock::now();
    json manifest;
    manifest["engine"] = "retrainbench";
    manifest["version"] = kVersion;
    manifest["status"] = "failed";
    manifest["seeds"] = {{"models", config.hyper.rng_seed},
                         {"synthetic", config.synthetic.rng_seed}};

    auto write_manifest = [&](const std::string& status, const std::string& error = "") {
        manifest["status"] = status;
        if (!error.empty()) manifest["error"] = error;
        manifest["wall_time_s"] =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - run_start).count();
        std::ofstream out(dir / "manifest.json");
        out << manifest.dump(2) << '\n';
    };

    try {
        std::ofstream resolved(dir / "resolved_config.json");
        resolved << config.to_json();
        resolved.close();

        const TimeSeriesPanel panel = materialize_panel(config);
        manifest["panel"] = {{"n_series", panel.n_series()},
                             {"n_timestamps", panel.n_timestamps()},
                             {"frequency", frequency_name(panel.frequency())}};

        BacktestConfig backtest = config.backtest;
        backtest.min_train = std::max(config.features.warm_up() + 1, backtest.season + 1);

        if (config.dump_features) {
            const std::vector<int> origins =
                enumerate_origins(backtest, static_cast<int>(panel.n_timestamps()));
            const FeatureMatrix matrix =
                build_training_matrix(panel, origins.front(), config.features);
            dump_feature_matrix_csv(matrix, panel, (dir / "features.csv").string());
        }

        const std::vector<BacktestRun> runs =
            run_grid(panel, config.families, config.features, backtest, config.hyper, config.jobs);

        outcome.n_cells = runs.size();
        json cells = json::array();
        for (const auto& run : runs) {
            json cell;
            cell["model"] = family_name(run.family);
            cell["r"] = run.r;
            cell["seed"] = run.rng_seed;
            cell["status"] = run.failed ? "failed" : "ok";
            if (run.failed) {
                cell["error"] = run.error;
                ++outcome.n_failed;
            }
            cells.push_back(std::move(cell));
        }
        manifest["cells"] = std::move(cells);

        if (outcome.n_failed == outcome.n_cells) {
            write_manifest("failed", "every grid cell failed");
            return outcome;
        }

        write_forecasts_csv(runs, panel, backtest, config.hyper.quantile_levels,
                            (dir / "forecasts.csv").string());
        write_fits_csv(runs, panel, (dir / "fits.csv").string());

        const MetricFrame frame = aggregate(runs, panel, backtest);
        write_metrics_csv(frame, (dir / "metrics.csv").string());
        write_metrics_detail_csv(frame, panel, (dir / "metrics_detail.csv").string());
        write_stats_json(frame, config.alpha, config.families, (dir / "stats.json").string());

        CostModel cost = config.cost;
        cost.n_series_dataset = panel.n_series();
        write_cost_csv(cost_table(frame, cost), (dir / "cost.csv").string());

        const OptimalFrequencyTable optimal_rmsse = optimal_frequency(frame, RankMetric::rmsse);
        const OptimalFrequencyTable optimal_smql = optimal_frequency(frame, RankMetric::smql);
        write_optimal_csv(optimal_rmsse, optimal_smql, panel, (dir / "optimal.csv").string());

        manifest["artifacts"] = {"resolved_config.json", "forecasts.csv",     "fits.csv",
                                 "metrics.csv",          "metrics_detail.csv", "stats.json",
                                 "cost.csv",             "optimal.csv"};
        write_manifest(outcome.n_failed == 0 ? "complete" : "partial");
        return outcome;
    } catch (const std::exception& e) {
        write_manifest("failed", e.what());
        throw;
    }
}

}  // namespace retrainbench
