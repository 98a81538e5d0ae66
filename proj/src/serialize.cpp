// .rbmodel serialization: 4-byte magic, uint32 LE header length, JSON header,
// then a raw little-endian float64 parameter block. See docs/model_format.md.

#include <cstring>
#include <fstream>

#include <nlohmann/json.hpp>

#include "retrainbench/errors.hpp"
#include "retrainbench/gbt.hpp"
#include "retrainbench/linear.hpp"
#include "retrainbench/mlp.hpp"
#include "retrainbench/models.hpp"

namespace retrainbench {

namespace {

using json = nlohmann::ordered_json;

constexpr char kMagic[4] = {'R', 'B', 'M', '1'};

json schema_to_json(const FeatureSchema& schema) {
    json j;
    j["columns"] = schema.columns;
    j["static_categories"] = schema.static_categories;
    j["event_categories"] = schema.event_categories;
    j["target_transform"] = transform_name(schema.target_transform);
    return j;
}

FeatureSchema schema_from_json(const json& j) {
    FeatureSchema schema;
    schema.columns = j.at("columns").get<std::vector<std::string>>();
    schema.static_categories =
        j.at("static_categories").get<std::vector<std::vector<std::string>>>();
    schema.event_categories =
        j.at("event_categories").get<std::vector<std::vector<std::string>>>();
    schema.target_transform = transform_from_name(j.at("target_transform").get<std::string>());
    return schema;
}

json booster_structure(const GbtBooster& booster) {
    json j;
    j["loss"] = booster.loss.kind == GbtLoss::Kind::squared ? "squared" : "pinball";
    j["q"] = booster.loss.q;
    j["learning_rate"] = booster.learning_rate;
    std::vector<std::size_t> nodes;
    nodes.reserve(booster.trees.size());
    for (const auto& tree : booster.trees) nodes.push_back(tree.size());
    j["nodes_per_tree"] = nodes;
    return j;
}

void append_booster_params(const GbtBooster& booster, std::vector<double>& out) {
    out.push_back(booster.base_score);
    for (const auto& tree : booster.trees) {
        for (const auto& node : tree) {
            out.push_back(static_cast<double>(node.feature));
            out.push_back(node.threshold);
            out.push_back(static_cast<double>(node.left));
            out.push_back(static_cast<double>(node.right));
            out.push_back(node.value);
        }
    }
}

GbtBooster booster_from(const json& structure, const double*& cursor) {
    GbtBooster booster;
    const std::string loss = structure.at("loss").get<std::string>();
    booster.loss = loss == "squared" ? GbtLoss::squared()
                                     : GbtLoss::pinball(structure.at("q").get<double>());
    booster.learning_rate = structure.at("learning_rate").get<double>();
    booster.base_score = *cursor++;
    for (std::size_t n_nodes : structure.at("nodes_per_tree").get<std::vector<std::size_t>>()) {
        std::vector<GbtTreeNode> tree(n_nodes);
        for (auto& node : tree) {
            node.feature = static_cast<int>(*cursor++);
            node.threshold = *cursor++;
            node.left = static_cast<int>(*cursor++);
            node.right = static_cast<int>(*cursor++);
            node.value = *cursor++;
        }
        booster.trees.push_back(std::move(tree));
    }
    return booster;
}

}  // namespace

void save_model(const GlobalModel& model, const std::string& path) {
    json header;
    header["format"] = 1;
    header["family"] = family_name(model.family());
    header["quantile_levels"] = model.quantile_levels();
    header["schema"] = schema_to_json(model.schema());
    header["seed"] = model.rng_seed();

    std::vector<double> params;
    json structure;
    if (const auto* linear = dynamic_cast<const PooledLinearModel*>(&model)) {
        structure["n_cols"] = model.schema().n_columns();
        params.insert(params.end(), linear->point_coefficients().begin(),
                      linear->point_coefficients().end());
        for (const auto& coef : linear->quantile_coefficients()) {
            params.insert(params.end(), coef.begin(), coef.end());
        }
    } else if (const auto* gbt = dynamic_cast<const GbtModel*>(&model)) {
        structure["point"] = booster_structure(gbt->point_booster());
        json heads = json::array();
        for (const auto& head : gbt->quantile_heads()) heads.push_back(booster_structure(head));
        structure["heads"] = std::move(heads);
        append_booster_params(gbt->point_booster(), params);
        for (const auto& head : gbt->quantile_heads()) append_booster_params(head, params);
    } else if (const auto* mlp = dynamic_cast<const MlpModel*>(&model)) {
        structure["n_inputs"] = mlp->network().n_inputs();
        structure["hidden_sizes"] = mlp->network().hidden_sizes();
        structure["n_outputs"] = mlp->network().n_outputs();
        params.insert(params.end(), mlp->network().parameters().begin(),
                      mlp->network().parameters().end());
        const Standardizer& scaler = mlp->scaler();
        params.insert(params.end(), scaler.mean.begin(), scaler.mean.end());
        params.insert(params.end(), scaler.stddev.begin(), scaler.stddev.end());
        params.push_back(scaler.target_mean);
        params.push_back(scaler.target_stddev);
    } else {
        throw ConfigError("model family cannot be serialized");
    }
    header["structure"] = std::move(structure);
    header["n_params"] = params.size();

    const std::string header_text = header.dump();
    std::ofstream out(path, std::ios::binary);
    if (!out) throw MalformedRow("cannot open for writing: " + path);
    out.write(kMagic, 4);
    const auto header_len = static_cast<std::uint32_t>(header_text.size());
    char len_bytes[4];
    std::memcpy(len_bytes, &header_len, 4);
    out.write(len_bytes, 4);
    out.write(header_text.data(), static_cast<std::streamsize>(header_text.size()));
    out.write(reinterpret_cast<const char*>(params.data()),
              static_cast<std::streamsize>(params.size() * sizeof(double)));
}

std::unique_ptr<GlobalModel> load_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw MissingArtifact("cannot open model file: " + path);
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, kMagic, 4) != 0) {
        throw MalformedRow("not a .rbmodel file: " + path);
    }
    char len_bytes[4];
    in.read(len_bytes, 4);
    std::uint32_t header_len = 0;
    std::memcpy(&header_len, len_bytes, 4);
    std::string header_text(header_len, '\0');
    in.read(header_text.data(), header_len);
    if (!in) throw MalformedRow("truncated model header: " + path);

    const json header = json::parse(header_text);
    if (header.at("format").get<int>() != 1) {
        throw MalformedRow("unsupported model format version");
    }
    const auto n_params = header.at("n_params").get<std::size_t>();
    std::vector<double> params(n_params);
    in.read(reinterpret_cast<char*>(params.data()),
            static_cast<std::streamsize>(n_params * sizeof(double)));
    if (!in) throw MalformedRow("truncated parameter block: " + path);

    FeatureSchema schema = schema_from_json(header.at("schema"));
    auto levels = header.at("quantile_levels").get<std::vector<double>>();
    const ModelFamily family = family_from_name(header.at("family").get<std::string>());
    const json& structure = header.at("structure");

    if (family == ModelFamily::pooled_linear) {
        const std::size_t width = schema.n_columns() + 1;
        if (n_params != width * (1 + levels.size())) {
            throw MalformedRow("parameter count mismatch for pooled_linear");
        }
        std::vector<double> point(params.begin(), params.begin() + static_cast<std::ptrdiff_t>(width));
        std::vector<std::vector<double>> heads;
        for (std::size_t k = 0; k < levels.size(); ++k) {
            const auto begin = params.begin() + static_cast<std::ptrdiff_t>(width * (k + 1));
            heads.emplace_back(begin, begin + static_cast<std::ptrdiff_t>(width));
        }
        return std::make_unique<PooledLinearModel>(std::move(schema), std::move(levels),
                                                   std::move(point), std::move(heads));
    }
    if (family == ModelFamily::gbt) {
        const double* cursor = params.data();
        GbtBooster point = booster_from(structure.at("point"), cursor);
        std::vector<GbtBooster> heads;
        for (const auto& head : structure.at("heads")) {
            heads.push_back(booster_from(head, cursor));
        }
        if (cursor != params.data() + params.size()) {
            throw MalformedRow("parameter count mismatch for gbt");
        }
        return std::make_unique<GbtModel>(std::move(schema), std::move(levels), std::move(point),
                                          std::move(heads));
    }
    if (family == ModelFamily::mlp) {
        MlpNetwork net(structure.at("n_inputs").get<int>(),
                       structure.at("hidden_sizes").get<std::vector<int>>(),
                       structure.at("n_outputs").get<int>());
        const std::size_t p = schema.n_columns();
        const std::size_t expected = net.n_parameters() + 2 * p + 2;
        if (n_params != expected) throw MalformedRow("parameter count mismatch for mlp");
        std::copy_n(params.begin(), net.n_parameters(), net.parameters().begin());
        Standardizer scaler;
        const double* cursor = params.data() + net.n_parameters();
        scaler.mean.assign(cursor, cursor + p);
        cursor += p;
        scaler.stddev.assign(cursor, cursor + p);
        cursor += p;
        scaler.target_mean = *cursor++;
        scaler.target_stddev = *cursor++;
        return std::make_unique<MlpModel>(std::move(schema), std::move(levels), std::move(net),
                                          std::move(scaler), header.at("seed").get<std::uint64_t>());
    }
    throw MalformedRow("model family '" + std::string(family_name(family)) +
                       "' has no serialized form");
}

}  // namespace retrainbench
