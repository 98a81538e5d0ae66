#include "retrainbench/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "retrainbench/errors.hpp"

namespace retrainbench {

namespace {

using json = nlohmann::ordered_json;

void check_keys(const json& section, const std::string& name,
                const std::set<std::string>& allowed) {
    for (const auto& [key, value] : section.items()) {
        if (!allowed.count(key)) {
            throw ConfigError("unknown key '" + key + "' in section '" + name + "'");
        }
    }
}

template <typename T>
T get_or(const json& j, const std::string& key, T fallback) {
    if (!j.contains(key) || j.at(key).is_null()) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const json::exception&) {
        throw ConfigError("key '" + key + "' has the wrong type");
    }
}

}  // namespace

RunConfig parse_run_config(const std::string& json_text) {
    json root;
    try {
        root = json::parse(json_text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    check_keys(root, "<root>",
               {"dataset", "features", "models", "backtest", "analysis", "output"});

    RunConfig config;

    const json dataset = root.value("dataset", json::object());
    check_keys(dataset, "dataset",
               {"source", "frequency", "min_obs", "demand_csv", "statics_csv", "calendar_csv",
                "synthetic"});
    config.frequency = frequency_from_name(get_or<std::string>(dataset, "frequency", "weekly"));
    config.dataset_source = get_or<std::string>(dataset, "source", "synthetic");
    if (config.dataset_source != "synthetic" && config.dataset_source != "csv") {
        throw ConfigError("dataset.source must be 'synthetic' or 'csv'");
    }
    config.min_obs = get_or<int>(dataset, "min_obs", default_min_obs(config.frequency));
    config.demand_csv = get_or<std::string>(dataset, "demand_csv", "");
    if (dataset.contains("statics_csv") && !dataset.at("statics_csv").is_null()) {
        config.statics_csv = dataset.at("statics_csv").get<std::string>();
    }
    if (dataset.contains("calendar_csv") && !dataset.at("calendar_csv").is_null()) {
        config.calendar_csv = dataset.at("calendar_csv").get<std::string>();
    }
    {
        const json synth = dataset.value("synthetic", json::object());
        check_keys(synth, "dataset.synthetic",
                   {"n_series", "length", "base_rate", "rate_spread", "seasonality_amplitude",
                    "zero_inflation", "trend_slope", "dispersion", "rng_seed", "start_date"});
        SyntheticSpec& spec = config.synthetic;
        spec.frequency = config.frequency;
        spec.n_series = get_or<int>(synth, "n_series", spec.n_series);
        spec.length = get_or<int>(synth, "length", spec.length);
        spec.base_rate = get_or<double>(synth, "base_rate", spec.base_rate);
        spec.rate_spread = get_or<double>(synth, "rate_spread", spec.rate_spread);
        spec.seasonality_amplitude =
            get_or<double>(synth, "seasonality_amplitude", spec.seasonality_amplitude);
        spec.zero_inflation = get_or<double>(synth, "zero_inflation", spec.zero_inflation);
        spec.trend_slope = get_or<double>(synth, "trend_slope", spec.trend_slope);
        spec.dispersion = get_or<double>(synth, "dispersion", spec.dispersion);
        spec.rng_seed = get_or<std::uint64_t>(synth, "rng_seed", spec.rng_seed);
        spec.start_date = get_or<std::string>(synth, "start_date", spec.start_date);
    }

    config.features = FeatureConfig::defaults_for(config.frequency);
    if (root.contains("features")) {
        const json features = root.at("features");
        check_keys(features, "features",
                   {"lags", "rolling_windows", "use_expanding_mean", "calendar_fields",
                    "static_encoding", "event_encoding", "target_transform"});
        config.features.lags = get_or<std::vector<int>>(features, "lags", config.features.lags);
        config.features.rolling_windows =
            get_or<std::vector<int>>(features, "rolling_windows", config.features.rolling_windows);
        config.features.use_expanding_mean =
            get_or<bool>(features, "use_expanding_mean", config.features.use_expanding_mean);
        if (features.contains("calendar_fields")) {
            config.features.calendar_fields.clear();
            for (const auto& name : features.at("calendar_fields")) {
                config.features.calendar_fields.push_back(
                    calendar_field_from_name(name.get<std::string>()));
            }
        }
        config.features.static_encoding = encoding_from_name(
            get_or<std::string>(features, "static_encoding", encoding_name(config.features.static_encoding)));
        config.features.event_encoding = encoding_from_name(
            get_or<std::string>(features, "event_encoding", encoding_name(config.features.event_encoding)));
        config.features.target_transform = transform_from_name(
            get_or<std::string>(features, "target_transform", transform_name(config.features.target_transform)));
    }

    if (root.contains("models")) {
        const json models = root.at("models");
        check_keys(models, "models",
                   {"families", "rng_seed", "quantile_levels", "pooled_linear", "gbt", "mlp"});
        if (models.contains("families")) {
            config.families.clear();
            for (const auto& name : models.at("families")) {
                config.families.push_back(family_from_name(name.get<std::string>()));
            }
        }
        config.hyper.rng_seed = get_or<std::uint64_t>(models, "rng_seed", config.hyper.rng_seed);
        config.hyper.quantile_levels = get_or<std::vector<double>>(models, "quantile_levels",
                                                                   config.hyper.quantile_levels);
        const json linear = models.value("pooled_linear", json::object());
        check_keys(linear, "models.pooled_linear",
                   {"ridge_lambda", "quantile_epochs", "quantile_learning_rate"});
        config.hyper.linear.ridge_lambda =
            get_or<double>(linear, "ridge_lambda", config.hyper.linear.ridge_lambda);
        config.hyper.linear.quantile_epochs =
            get_or<int>(linear, "quantile_epochs", config.hyper.linear.quantile_epochs);
        config.hyper.linear.quantile_learning_rate = get_or<double>(
            linear, "quantile_learning_rate", config.hyper.linear.quantile_learning_rate);
        const json gbt = models.value("gbt", json::object());
        check_keys(gbt, "models.gbt",
                   {"n_trees", "learning_rate", "max_depth", "min_leaf", "n_bins"});
        config.hyper.gbt.n_trees = get_or<int>(gbt, "n_trees", config.hyper.gbt.n_trees);
        config.hyper.gbt.learning_rate =
            get_or<double>(gbt, "learning_rate", config.hyper.gbt.learning_rate);
        config.hyper.gbt.max_depth = get_or<int>(gbt, "max_depth", config.hyper.gbt.max_depth);
        config.hyper.gbt.min_leaf = get_or<int>(gbt, "min_leaf", config.hyper.gbt.min_leaf);
        config.hyper.gbt.n_bins = get_or<int>(gbt, "n_bins", config.hyper.gbt.n_bins);
        const json mlp = models.value("mlp", json::object());
        check_keys(mlp, "models.mlp",
                   {"hidden_sizes", "epochs", "batch_size", "learning_rate"});
        config.hyper.mlp.hidden_sizes =
            get_or<std::vector<int>>(mlp, "hidden_sizes", config.hyper.mlp.hidden_sizes);
        config.hyper.mlp.epochs = get_or<int>(mlp, "epochs", config.hyper.mlp.epochs);
        config.hyper.mlp.batch_size = get_or<int>(mlp, "batch_size", config.hyper.mlp.batch_size);
        config.hyper.mlp.learning_rate =
            get_or<double>(mlp, "learning_rate", config.hyper.mlp.learning_rate);
    }

    config.backtest = BacktestConfig::defaults_for(config.frequency);
    if (root.contains("backtest")) {
        const json backtest = root.at("backtest");
        check_keys(backtest, "backtest",
                   {"horizon", "test_size", "step_size", "retrain_set", "baseline_r", "season",
                    "scale_from_first_origin"});
        config.backtest.horizon = get_or<int>(backtest, "horizon", config.backtest.horizon);
        config.backtest.test_size = get_or<int>(backtest, "test_size", config.backtest.test_size);
        config.backtest.step_size = get_or<int>(backtest, "step_size", config.backtest.step_size);
        config.backtest.retrain_set =
            get_or<std::vector<int>>(backtest, "retrain_set", config.backtest.retrain_set);
        config.backtest.baseline_r = get_or<int>(backtest, "baseline_r", config.backtest.baseline_r);
        config.backtest.season = get_or<int>(backtest, "season", config.backtest.season);
        config.backtest.scale_from_first_origin = get_or<bool>(
            backtest, "scale_from_first_origin", config.backtest.scale_from_first_origin);
    }

    if (root.contains("analysis")) {
        const json analysis = root.at("analysis");
        check_keys(analysis, "analysis", {"alpha", "cost"});
        config.alpha = get_or<double>(analysis, "alpha", config.alpha);
        const json cost = analysis.value("cost", json::object());
        check_keys(cost, "analysis.cost", {"rate_per_hour", "n_series_target", "currency"});
        config.cost.rate_per_hour =
            get_or<double>(cost, "rate_per_hour", config.cost.rate_per_hour);
        config.cost.n_series_target =
            get_or<std::size_t>(cost, "n_series_target", config.cost.n_series_target);
        config.cost.currency = get_or<std::string>(cost, "currency", config.cost.currency);
    }

    if (root.contains("output")) {
        const json output = root.at("output");
        check_keys(output, "output", {"directory", "dump_features", "jobs"});
        config.output_dir = get_or<std::string>(output, "directory", config.output_dir);
        config.dump_features = get_or<bool>(output, "dump_features", config.dump_features);
        config.jobs = get_or<int>(output, "jobs", config.jobs);
    }

    return config;
}

RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_run_config(buffer.str());
}

std::vector<std::string> RunConfig::validate() const {
    std::vector<std::string> warnings;

    if (min_obs < 1) throw ConfigError("dataset.min_obs must be >= 1");
    if (dataset_source == "csv" && demand_csv.empty()) {
        throw ConfigError("dataset.source is 'csv' but dataset.demand_csv is not set");
    }
    if (dataset_source == "synthetic") {
        synthetic.validate();
        if (synthetic.frequency != frequency) {
            throw ConfigError("synthetic spec frequency disagrees with dataset.frequency");
        }
    }
    features.validate();
    backtest.validate();
    if (backtest.frequency != frequency) {
        throw ConfigError("backtest frequency disagrees with dataset.frequency");
    }
    if (families.empty()) throw ConfigError("models.families must be non-empty");
    {
        std::set<ModelFamily> seen(families.begin(), families.end());
        if (seen.size() != families.size()) throw ConfigError("models.families has duplicates");
    }
    const auto& levels = hyper.quantile_levels;
    if (levels.empty()) throw ConfigError("models.quantile_levels must be non-empty");
    for (std::size_t k = 0; k < levels.size(); ++k) {
        if (levels[k] <= 0.0 || levels[k] >= 1.0) {
            throw ConfigError("quantile levels must lie strictly inside (0, 1)");
        }
        if (k > 0 && levels[k] <= levels[k - 1]) {
            throw ConfigError("quantile levels must be strictly increasing");
        }
    }
    if (hyper.linear.ridge_lambda < 0.0) throw ConfigError("ridge_lambda must be >= 0");
    if (hyper.linear.quantile_epochs < 0) throw ConfigError("quantile_epochs must be >= 0");
    hyper.gbt.validate();
    hyper.mlp.validate();

    // The minimum history must leave room for the warm-up and the seasonal
    // scaler before the first forecast origin.
    const int needed = backtest.test_size +
                       std::max(features.warm_up() + 1, backtest.season + 1);
    if (min_obs < needed) {
        throw ConfigError("dataset.min_obs=" + std::to_string(min_obs) +
                          " is too small: test_size + max(warm_up, season) + 1 = " +
                          std::to_string(needed));
    }

    if (alpha != 0.05 && alpha != 0.10) {
        throw ConfigError("analysis.alpha must be 0.05 or 0.10 (Nemenyi constant table)");
    }
    cost.validate();
    if (jobs < 1) throw ConfigError("output.jobs must be >= 1");
    if (output_dir.empty()) throw ConfigError("output.directory must be set");

    if (frequency == Frequency::daily) {
        for (int r : backtest.retrain_set) {
            if (r < 7) {
                warnings.push_back("daily retrain_set contains r=" + std::to_string(r) +
                                   " below the weekly-update baseline convention (r=7)");
                break;
            }
        }
    }
    return warnings;
}

std::string RunConfig::to_json() const {
    json root;
    json dataset;
    dataset["source"] = dataset_source;
    dataset["frequency"] = frequency_name(frequency);
    dataset["min_obs"] = min_obs;
    dataset["demand_csv"] = demand_csv;
    if (statics_csv) {
        dataset["statics_csv"] = *statics_csv;
    } else {
        dataset["statics_csv"] = nullptr;
    }
    if (calendar_csv) {
        dataset["calendar_csv"] = *calendar_csv;
    } else {
        dataset["calendar_csv"] = nullptr;
    }
    json synth;
    synth["n_series"] = synthetic.n_series;
    synth["length"] = synthetic.length;
    synth["base_rate"] = synthetic.base_rate;
    synth["rate_spread"] = synthetic.rate_spread;
    synth["seasonality_amplitude"] = synthetic.seasonality_amplitude;
    synth["zero_inflation"] = synthetic.zero_inflation;
    synth["trend_slope"] = synthetic.trend_slope;
    synth["dispersion"] = synthetic.dispersion;
    synth["rng_seed"] = synthetic.rng_seed;
    synth["start_date"] = synthetic.start_date;
    dataset["synthetic"] = std::move(synth);
    root["dataset"] = std::move(dataset);

    json features_json;
    features_json["lags"] = features.lags;
    features_json["rolling_windows"] = features.rolling_windows;
    features_json["use_expanding_mean"] = features.use_expanding_mean;
    std::vector<std::string> fields;
    for (CalendarField f : features.calendar_fields) fields.push_back(calendar_field_name(f));
    features_json["calendar_fields"] = fields;
    features_json["static_encoding"] = encoding_name(features.static_encoding);
    features_json["event_encoding"] = encoding_name(features.event_encoding);
    features_json["target_transform"] = transform_name(features.target_transform);
    root["features"] = std::move(features_json);

    json models;
    std::vector<std::string> family_names;
    for (ModelFamily f : families) family_names.push_back(family_name(f));
    models["families"] = family_names;
    models["rng_seed"] = hyper.rng_seed;
    models["quantile_levels"] = hyper.quantile_levels;
    json linear;
    linear["ridge_lambda"] = hyper.linear.ridge_lambda;
    linear["quantile_epochs"] = hyper.linear.quantile_epochs;
    linear["quantile_learning_rate"] = hyper.linear.quantile_learning_rate;
    models["pooled_linear"] = std::move(linear);
    json gbt;
    gbt["n_trees"] = hyper.gbt.n_trees;
    gbt["learning_rate"] = hyper.gbt.learning_rate;
    gbt["max_depth"] = hyper.gbt.max_depth;
    gbt["min_leaf"] = hyper.gbt.min_leaf;
    gbt["n_bins"] = hyper.gbt.n_bins;
    models["gbt"] = std::move(gbt);
    json mlp;
    mlp["hidden_sizes"] = hyper.mlp.hidden_sizes;
    mlp["epochs"] = hyper.mlp.epochs;
    mlp["batch_size"] = hyper.mlp.batch_size;
    mlp["learning_rate"] = hyper.mlp.learning_rate;
    models["mlp"] = std::move(mlp);
    root["models"] = std::move(models);

    json backtest_json;
    backtest_json["horizon"] = backtest.horizon;
    backtest_json["test_size"] = backtest.test_size;
    backtest_json["step_size"] = backtest.step_size;
    backtest_json["retrain_set"] = backtest.retrain_set;
    backtest_json["baseline_r"] = backtest.baseline_r;
    backtest_json["season"] = backtest.season;
    backtest_json["scale_from_first_origin"] = backtest.scale_from_first_origin;
    root["backtest"] = std::move(backtest_json);

    json analysis;
    analysis["alpha"] = alpha;
    json cost_json;
    cost_json["rate_per_hour"] = cost.rate_per_hour;
    cost_json["n_series_target"] = cost.n_series_target;
    cost_json["currency"] = cost.currency;
    analysis["cost"] = std::move(cost_json);
    root["analysis"] = std::move(analysis);

    json output;
    output["directory"] = output_dir;
    output["dump_features"] = dump_features;
    output["jobs"] = jobs;
    root["output"] = std::move(output);

    return root.dump(2) + "\n";
}

}  // namespace retrainbench
