#include "tart/model_io.hpp"

#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace tart {

namespace {

using nlohmann::json;

constexpr const char* kFormat = "tart-model";
constexpr int kVersion = 1;

json net_to_json(const Mlp& net) {
    json layers = json::array();
    for (const DenseLayer& layer : net.layers) {
        json jl;
        jl["out"] = layer.out_dim();
        jl["in"] = layer.in_dim();
        jl["activation"] = layer.activation == Activation::elu ? "elu" : "identity";
        jl["weights"] = std::vector<double>(layer.weights.data().begin(),
                                            layer.weights.data().end());
        jl["bias"] = layer.bias;
        layers.push_back(std::move(jl));
    }
    return json{{"layers", std::move(layers)}};
}

Mlp net_from_json(const json& j, double dropout_prob) {
    Mlp net;
    net.dropout_prob = dropout_prob;
    net.mode = MlpMode::infer;
    for (const json& jl : j.at("layers")) {
        DenseLayer layer;
        const int out = jl.at("out").get<int>();
        const int in = jl.at("in").get<int>();
        if (out < 1 || in < 0) {
            throw std::runtime_error("model file: bad layer dimensions");
        }
        const std::string act = jl.at("activation").get<std::string>();
        if (act == "elu") {
            layer.activation = Activation::elu;
        } else if (act == "identity") {
            layer.activation = Activation::identity;
        } else {
            throw std::runtime_error("model file: unknown activation '" + act + "'");
        }
        const auto weights = jl.at("weights").get<std::vector<double>>();
        if (weights.size() != static_cast<size_t>(out) * static_cast<size_t>(in)) {
            throw std::runtime_error("model file: weight array size mismatch");
        }
        layer.weights = Matrix(out, in);
        std::copy(weights.begin(), weights.end(), layer.weights.data().begin());
        layer.bias = jl.at("bias").get<std::vector<double>>();
        if (layer.bias.size() != static_cast<size_t>(out)) {
            throw std::runtime_error("model file: bias array size mismatch");
        }
        net.layers.push_back(std::move(layer));
    }
    if (net.layers.empty()) {
        throw std::runtime_error("model file: empty network");
    }
    return net;
}

} // namespace

void save_model(const TartModel& m, std::ostream& out) {
    json j;
    j["format"] = kFormat;
    j["version"] = kVersion;
    j["window"] = m.shape.window;
    j["stride"] = m.shape.stride;
    j["depth"] = m.shape.depth;
    j["decision_layers"] = m.decision_layer_count;
    j["leaf_layers"] = m.leaf_layer_count;
    j["hidden_units"] = m.hidden_units;
    j["input_dim"] = m.input_dim;
    j["class_count"] = m.class_count;
    j["leaf_mode"] = m.leaf_mode == LeafMode::multi ? "multi" : "single";
    j["decision_norm"] =
        m.decision_norm == DecisionNorm::softmax ? "softmax" : "sigmoid_pair";
    j["dropout"] = m.dropout_prob;
    j["feature_means"] = m.feature_means;
    j["feature_stds"] = m.feature_stds;

    json decisions = json::array();
    for (const auto& layer_nets : m.decision_nets) {
        json row = json::array();
        for (const Mlp& net : layer_nets) row.push_back(net_to_json(net));
        decisions.push_back(std::move(row));
    }
    j["decision_nets"] = std::move(decisions);

    json leaves = json::array();
    for (const Mlp& net : m.leaf_nets) leaves.push_back(net_to_json(net));
    j["leaf_nets"] = std::move(leaves);

    out << j.dump(1) << '\n';
    if (!out) {
        throw std::runtime_error("model file: write failed");
    }
}

void save_model(const TartModel& m, const std::string& path) {
    std::ofstream f(path);
    if (!f) {
        throw std::runtime_error("cannot open for writing: " + path);
    }
    save_model(m, f);
}

TartModel load_model(std::istream& in) {
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw std::runtime_error(std::string("model file: parse error: ") + e.what());
    }
    if (!j.is_object() || j.value("format", "") != kFormat) {
        throw std::runtime_error("model file: not a tart-model document");
    }
    if (j.at("version").get<int>() != kVersion) {
        throw std::runtime_error("model file: unsupported version");
    }

    TartModel m;
    m.shape.window = j.at("window").get<int>();
    m.shape.stride = j.at("stride").get<int>();
    m.shape.depth = j.at("depth").get<int>();
    m.shape.validate();
    m.decision_layer_count = j.at("decision_layers").get<int>();
    m.leaf_layer_count = j.at("leaf_layers").get<int>();
    m.hidden_units = j.at("hidden_units").get<int>();
    m.input_dim = j.at("input_dim").get<int>();
    m.class_count = j.at("class_count").get<int>();
    const std::string mode = j.at("leaf_mode").get<std::string>();
    if (mode == "multi") {
        m.leaf_mode = LeafMode::multi;
    } else if (mode == "single") {
        m.leaf_mode = LeafMode::single;
    } else {
        throw std::runtime_error("model file: unknown leaf_mode '" + mode + "'");
    }
    const std::string norm = j.at("decision_norm").get<std::string>();
    if (norm == "softmax") {
        m.decision_norm = DecisionNorm::softmax;
    } else if (norm == "sigmoid_pair") {
        m.decision_norm = DecisionNorm::sigmoid_pair;
    } else {
        throw std::runtime_error("model file: unknown decision_norm '" + norm + "'");
    }
    m.dropout_prob = j.at("dropout").get<double>();
    m.feature_means = j.at("feature_means").get<std::vector<double>>();
    m.feature_stds = j.at("feature_stds").get<std::vector<double>>();

    const std::vector<int> widths = layer_widths(m.shape);
    const json& decisions = j.at("decision_nets");
    if (m.decision_layer_count > 0 &&
        static_cast<int>(decisions.size()) != m.shape.depth) {
        throw std::runtime_error("model file: decision layer count mismatch");
    }
    m.decision_nets.resize(decisions.size());
    for (size_t d = 0; d < decisions.size(); ++d) {
        if (static_cast<int>(decisions[d].size()) != widths[d]) {
            throw std::runtime_error("model file: decision node count mismatch");
        }
        for (const json& jn : decisions[d]) {
            m.decision_nets[d].push_back(net_from_json(jn, m.dropout_prob));
        }
    }
    const json& leaves = j.at("leaf_nets");
    if (static_cast<int>(leaves.size()) != widths.back()) {
        throw std::runtime_error("model file: leaf count mismatch");
    }
    for (const json& jn : leaves) {
        m.leaf_nets.push_back(net_from_json(jn, m.dropout_prob));
    }
    return m;
}

TartModel load_model(const std::string& path) {
    std::ifstream f(path);
    if (!f) {
        throw std::runtime_error("cannot open model file: " + path);
    }
    return load_model(f);
}

} // namespace tart
