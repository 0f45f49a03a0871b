#include "tart/model.hpp"

#include <cmath>
#include <stdexcept>

namespace tart {

const std::array<Preset, 3>& presets() {
    static const std::array<Preset, 3> table = {{
        {'A', 2, 2, 6, 1, 1, "strong in small data"},
        {'B', 2, 2, 2, 1, 4, "strong in large data"},
        {'C', 3, 2, 3, 1, 2, "best balance"},
    }};
    return table;
}

const Preset& preset(char name) {
    for (const Preset& p : presets()) {
        if (p.name == name) return p;
    }
    throw std::invalid_argument("unknown preset (expected A, B or C)");
}

TartModel build_model(const TreeShape& shape, int decision_layers, int leaf_layers,
                      int input_dim, int class_count, int hidden_units,
                      LeafMode leaf_mode, Rng& rng, DecisionNorm norm,
                      double dropout_prob) {
    shape.validate();
    if (decision_layers < 0 || leaf_layers < 0) {
        throw std::invalid_argument("build_model: layer counts must be >= 0");
    }
    if (input_dim < 1) {
        throw std::invalid_argument("build_model: input_dim must be >= 1");
    }
    if (class_count < 2) {
        throw std::invalid_argument("build_model: class_count must be >= 2");
    }
    if (norm == DecisionNorm::sigmoid_pair && shape.window != 2) {
        throw std::invalid_argument("build_model: sigmoid_pair needs window == 2");
    }

    TartModel m;
    m.shape = shape;
    m.decision_layer_count = decision_layers;
    m.leaf_layer_count = leaf_layers;
    m.hidden_units = hidden_units;
    m.input_dim = input_dim;
    m.class_count = class_count;
    m.leaf_mode = leaf_mode;
    m.decision_norm = norm;
    m.dropout_prob = dropout_prob;

    const std::vector<int> widths = layer_widths(shape);
    if (decision_layers > 0) {
        const int decision_out = norm == DecisionNorm::sigmoid_pair ? 1 : shape.window;
        m.decision_nets.resize(static_cast<size_t>(shape.depth));
        for (int d = 0; d < shape.depth; ++d) {
            m.decision_nets[d].reserve(static_cast<size_t>(widths[d]));
            for (int i = 0; i < widths[d]; ++i) {
                m.decision_nets[d].push_back(make_mlp(input_dim, decision_out,
                                                      decision_layers, hidden_units,
                                                      dropout_prob, rng));
            }
        }
    }
    m.leaf_nets.reserve(static_cast<size_t>(widths.back()));
    for (int u = 0; u < widths.back(); ++u) {
        if (leaf_layers > 0) {
            m.leaf_nets.push_back(make_mlp(input_dim, class_count, leaf_layers,
                                           hidden_units, dropout_prob, rng));
        } else {
            m.leaf_nets.push_back(make_free_logits(class_count));
        }
    }
    return m;
}

std::vector<double> decision_column(const TartModel& m,
                                    std::span<const double> logits) {
    if (m.decision_norm == DecisionNorm::sigmoid_pair) {
        if (logits.size() != 1) {
            throw std::invalid_argument("decision_column: sigmoid_pair expects one logit");
        }
        const double s = sigmoid(logits[0]);
        return {s, 1.0 - s};
    }
    if (static_cast<int>(logits.size()) != m.shape.window) {
        throw std::invalid_argument("decision_column: logit count != window");
    }
    return softmax(logits);
}

std::vector<double> decision_column_backward(const TartModel& m,
                                             std::span<const double> column,
                                             std::span<const double> grad_column) {
    if (column.size() != grad_column.size() ||
        static_cast<int>(column.size()) != m.shape.window) {
        throw std::invalid_argument("decision_column_backward: size mismatch");
    }
    if (m.decision_norm == DecisionNorm::sigmoid_pair) {
        const double s = column[0];
        return {s * (1.0 - s) * (grad_column[0] - grad_column[1])};
    }
    return softmax_backward(column, grad_column);
}

ModelEval model_forward(const TartModel& m, std::span<const double> x, Rng* rng) {
    if (static_cast<int>(x.size()) != m.input_dim) {
        throw std::invalid_argument("model_forward: input dimension mismatch");
    }
    const std::vector<int> widths = layer_widths(m.shape);
    const int depth = m.shape.depth;
    const int window = m.shape.window;

    ModelEval eval;
    eval.transitions.reserve(static_cast<size_t>(depth));
    eval.decision_caches.resize(static_cast<size_t>(depth));
    eval.arrivals.reserve(static_cast<size_t>(depth) + 1);
    eval.arrivals.push_back({1.0});

    const bool uniform = m.decision_layer_count == 0;
    for (int d = 0; d < depth; ++d) {
        LocalTransition b(window, widths[d]);
        if (uniform) {
            b.fill(1.0 / static_cast<double>(window));
        } else {
            eval.decision_caches[d].reserve(static_cast<size_t>(widths[d]));
            for (int i = 0; i < widths[d]; ++i) {
                MlpCache cache = mlp_forward(m.decision_nets[d][i], x, rng);
                const std::vector<double> col = decision_column(m, cache.logits());
                for (int w = 0; w < window; ++w) b(w, i) = col[w];
                eval.decision_caches[d].push_back(std::move(cache));
            }
        }
        eval.arrivals.push_back(tconv_forward(b, eval.arrivals.back(), m.shape.stride));
        eval.transitions.push_back(std::move(b));
    }

    const int leaves = widths.back();
    eval.leaf_rows = Matrix(leaves, m.class_count);
    eval.leaf_caches.reserve(static_cast<size_t>(leaves));
    for (int u = 0; u < leaves; ++u) {
        const Mlp& net = m.leaf_nets[u];
        // leaf nets with zero leaf layers take no input (free logits)
        MlpCache cache = mlp_forward(net, x.first(static_cast<size_t>(net.in_dim())), rng);
        const std::vector<double> row = softmax(cache.logits());
        for (int c = 0; c < m.class_count; ++c) eval.leaf_rows(u, c) = row[c];
        eval.leaf_caches.push_back(std::move(cache));
    }
    return eval;
}

namespace {

// Inference stays pure: mlp_forward throws if a train-mode net would need
// dropout masks and no rng is supplied, so passing nullptr is enough.
ModelEval infer_forward(const TartModel& m, std::span<const double> x) {
    return model_forward(m, x, nullptr);
}

} // namespace

std::vector<LocalTransition> local_transitions(const TartModel& m,
                                               std::span<const double> x) {
    return infer_forward(m, x).transitions;
}

std::vector<double> arrival_probabilities(const TartModel& m,
                                          std::span<const double> x) {
    return infer_forward(m, x).arrivals.back();
}

Matrix leaf_predictions(const TartModel& m, std::span<const double> x) {
    return infer_forward(m, x).leaf_rows;
}

std::vector<double> predict_multi(const TartModel& m, std::span<const double> x) {
    const ModelEval eval = infer_forward(m, x);
    const std::vector<double>& p = eval.arrivals.back();
    std::vector<double> out(static_cast<size_t>(m.class_count), 0.0);
    for (int u = 0; u < eval.leaf_rows.rows(); ++u) {
        for (int c = 0; c < m.class_count; ++c) {
            out[c] += p[u] * eval.leaf_rows(u, c);
        }
    }
    return out;
}

SinglePrediction predict_single(const TartModel& m, std::span<const double> x) {
    const ModelEval eval = infer_forward(m, x);
    const std::vector<double>& p = eval.arrivals.back();
    int best = 0;
    for (size_t u = 1; u < p.size(); ++u) {
        if (p[u] > p[best]) best = static_cast<int>(u);
    }
    SinglePrediction out;
    out.leaf = best;
    const auto row = eval.leaf_rows.row(best);
    out.probs.assign(row.begin(), row.end());
    return out;
}

std::vector<double> predict(const TartModel& m, std::span<const double> x) {
    if (m.leaf_mode == LeafMode::multi) return predict_multi(m, x);
    return predict_single(m, x).probs;
}

Family classify_family(int depth, int decision_layers, int leaf_layers) {
    if (depth < 0 || decision_layers < 0 || leaf_layers < 0) {
        throw std::invalid_argument("classify_family: counts must be >= 0");
    }
    if (depth == 0) {
        return leaf_layers > 1 ? Family::multilayer_perceptron
                               : Family::logistic_regression;
    }
    if (decision_layers == 0) return Family::simple_ensemble;
    if (decision_layers == 1) {
        return leaf_layers == 0 ? Family::tree_type_1 : Family::tree_type_3;
    }
    return Family::tree_type_2;
}

std::string_view family_name(Family f) {
    switch (f) {
        case Family::logistic_regression: return "logistic-regression";
        case Family::multilayer_perceptron: return "multilayer-perceptron";
        case Family::simple_ensemble: return "simple-ensemble";
        case Family::tree_type_1: return "tree-type-1";
        case Family::tree_type_2: return "tree-type-2";
        case Family::tree_type_3: return "tree-type-3";
    }
    return "unknown";
}

void set_mode(TartModel& m, MlpMode mode) {
    for (auto& layer_nets : m.decision_nets) {
        for (Mlp& net : layer_nets) net.mode = mode;
    }
    for (Mlp& net : m.leaf_nets) net.mode = mode;
}

size_t param_count(const TartModel& m) {
    size_t n = 0;
    for_each_param(m, [&](std::span<const double> p) { n += p.size(); });
    return n;
}

} // namespace tart
