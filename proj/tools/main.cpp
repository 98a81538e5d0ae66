// retrainbench CLI: validate / run / report / synth.

#include <cstdlib>
#include <filesystem>
#include <iostream>

#include <CLI11.hpp>

#include "retrainbench/errors.hpp"
#include "retrainbench/report.hpp"
#include "retrainbench/runner.hpp"
#include "retrainbench/version.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitRuntime = 2;
constexpr int kExitPartialGrid = 3;

int jobs_from_env(int fallback) {
    const char* env = std::getenv("RETRAINBENCH_JOBS");
    if (env == nullptr) return fallback;
    const int jobs = std::atoi(env);
    return jobs >= 1 ? jobs : fallback;
}

int cmd_validate(const std::string& config_path) {
    try {
        const retrainbench::RunConfig config = retrainbench::load_run_config(config_path);
        const std::vector<std::string> warnings = config.validate();
        for (const auto& w : warnings) std::cout << "warning: " << w << "\n";
        std::cout << "config ok: " << config_path << "\n";
        return kExitOk;
    } catch (const retrainbench::Error& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return kExitValidation;
    }
}

int cmd_run(const std::string& config_path, int jobs_override, const std::string& out_override) {
    retrainbench::RunConfig config;
    try {
        config = retrainbench::load_run_config(config_path);
        // Precedence: --jobs flag, then RETRAINBENCH_JOBS, then the config.
        config.jobs = jobs_override > 0 ? jobs_override : jobs_from_env(config.jobs);
        if (!out_override.empty()) config.output_dir = out_override;
        const std::vector<std::string> warnings = config.validate();
        for (const auto& w : warnings) std::cout << "warning: " << w << "\n";
    } catch (const retrainbench::Error& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return kExitValidation;
    }

    try {
        const retrainbench::RunOutcome outcome = retrainbench::run_from_config(config);
        std::cout << "artifacts written to " << outcome.output_dir << " (" << outcome.n_cells
                  << " grid cells, " << outcome.n_failed << " failed)\n";
        if (outcome.all_failed()) return kExitRuntime;
        if (outcome.partial()) return kExitPartialGrid;
        return kExitOk;
    } catch (const std::exception& e) {
        std::cerr << "run failed: " << e.what() << "\n";
        return kExitRuntime;
    }
}

int cmd_report(const std::string& artifact_dir) {
    try {
        const std::vector<std::string> files = retrainbench::write_report(artifact_dir);
        std::cout << "report files:";
        for (const auto& f : files) std::cout << ' ' << f;
        std::cout << "\n";
        return kExitOk;
    } catch (const retrainbench::MissingArtifact& e) {
        std::cerr << "missing artifact: " << e.what() << "\n";
        return kExitRuntime;
    } catch (const std::exception& e) {
        std::cerr << "report failed: " << e.what() << "\n";
        return kExitRuntime;
    }
}

int cmd_synth(const std::string& config_path, const std::string& out_dir) {
    try {
        const retrainbench::RunConfig config = retrainbench::load_run_config(config_path);
        config.synthetic.validate();
        const retrainbench::TimeSeriesPanel panel =
            retrainbench::generate_synthetic(config.synthetic);
        std::filesystem::create_directories(out_dir);
        const auto dir = std::filesystem::path(out_dir);
        retrainbench::write_demand_csv(panel, (dir / "demand.csv").string());
        retrainbench::write_statics_csv(panel, (dir / "statics.csv").string());
        std::cout << "wrote " << (dir / "demand.csv").string() << " (" << panel.n_series()
                  << " series x " << panel.n_timestamps() << " timestamps) and statics.csv\n";
        return kExitOk;
    } catch (const retrainbench::Error& e) {
        std::cerr << "synth failed: " << e.what() << "\n";
        return kExitValidation;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{
        "retrainbench: retraining-frequency backtesting for global demand forecasting models"};
    app.set_version_flag("--version", retrainbench::kVersion);
    app.require_subcommand(1);

    std::string config_path;
    std::string artifact_dir;
    std::string out_dir;
    int jobs = 0;

    CLI::App* validate = app.add_subcommand("validate", "validate a run config file");
    validate->add_option("config", config_path, "path to the run config JSON")->required();

    CLI::App* run = app.add_subcommand("run", "execute the full backtest grid");
    run->add_option("config", config_path, "path to the run config JSON")->required();
    run->add_option("--jobs", jobs, "number of concurrent grid cells");
    run->add_option("--out", out_dir, "override the output directory");

    CLI::App* report = app.add_subcommand("report", "render charts from an artifact directory");
    report->add_option("artifacts", artifact_dir, "artifact directory produced by run")
        ->required();

    CLI::App* synth = app.add_subcommand("synth", "emit a synthetic panel CSV");
    synth->add_option("config", config_path, "run config with a dataset.synthetic section")
        ->required();
    synth->add_option("--out", out_dir, "output directory")->required();

    CLI11_PARSE(app, argc, argv);

    if (validate->parsed()) return cmd_validate(config_path);
    if (run->parsed()) return cmd_run(config_path, jobs, out_dir);
    if (report->parsed()) return cmd_report(artifact_dir);
    if (synth->parsed()) return cmd_synth(config_path, out_dir);
    return kExitValidation;
}
