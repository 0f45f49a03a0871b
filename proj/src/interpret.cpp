#include "tart/interpret.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>

namespace tart {

RelevanceVector linear_relevance(std::span<const double> f_grad,
                                 std::span<const double> x, double value) {
    if (f_grad.size() != x.size()) {
        throw std::invalid_argument("linear_relevance: length mismatch");
    }
    RelevanceVector r;
    r.value = value;
    r.scores.resize(x.size());
    for (size_t k = 0; k < x.size(); ++k) {
        r.scores[k] = f_grad[k] * x[k];
    }
    return r;
}

RelevanceVector softmax_relevance(const Matrix& weights, std::span<const double> x,
                                  std::span<const double> probs, int class_i) {
    if (weights.cols() != static_cast<int>(x.size())) {
        throw std::invalid_argument("softmax_relevance: feature count mismatch");
    }
    if (class_i < 0 || class_i >= weights.rows() ||
        probs.size() != static_cast<size_t>(weights.rows())) {
        throw std::invalid_argument("softmax_relevance: class index out of range");
    }
    RelevanceVector r;
    r.value = probs[class_i];
    r.scores.assign(x.size(), 0.0);
    double denom = 0.0;
    for (size_t k = 0; k < x.size(); ++k) {
        const double c = weights(class_i, static_cast<int>(k)) * x[k];
        if (c > 0.0) {
            r.scores[k] = c;
            denom += c;
        }
    }
    if (denom > 0.0) {
        for (double& s : r.scores) s = s / denom * r.value;
    } else {
        // no positive contribution: attribute nothing
        for (double& s : r.scores) s = 0.0;
    }
    return r;
}

RelevanceVector relevance_add(const RelevanceVector& a, const RelevanceVector& b) {
    if (a.scores.size() != b.scores.size()) {
        throw std::invalid_argument("relevance_add: length mismatch");
    }
    RelevanceVector r;
    r.value = a.value + b.value;
    r.scores.resize(a.scores.size());
    for (size_t k = 0; k < a.scores.size(); ++k) {
        r.scores[k] = a.scores[k] + b.scores[k];
    }
    return r;
}

RelevanceVector relevance_mul(const RelevanceVector& a, const RelevanceVector& b) {
    if (a.scores.size() != b.scores.size()) {
        throw std::invalid_argument("relevance_mul: length mismatch");
    }
    RelevanceVector r;
    r.value = a.value * b.value;
    r.scores.resize(a.scores.size());
    for (size_t k = 0; k < a.scores.size(); ++k) {
        r.scores[k] = (b.value * a.scores[k] + a.value * b.scores[k]) / 2.0;
    }
    return r;
}

namespace {

// Relevance of one component of a node's decision column. With softmax
// normalization this is the z+ rule on the node's single dense layer; a
// sigmoid pair [s, 1-s] is the two-row softmax with weights [w; -w].
RelevanceVector decision_component_relevance(const TartModel& m, const Mlp& net,
                                             std::span<const double> x,
                                             std::span<const double> column,
                                             int component) {
    const Matrix& w = net.layers.front().weights;
    if (m.decision_norm == DecisionNorm::sigmoid_pair) {
        Matrix pair(2, w.cols());
        for (int c = 0; c < w.cols(); ++c) {
            pair(0, c) = w(0, c);
            pair(1, c) = -w(0, c);
        }
        return softmax_relevance(pair, x, column, component);
    }
    return softmax_relevance(w, x, column, component);
}

void require_explainable_decisions(const TartModel& m) {
    if (m.shape.depth > 0 && m.decision_layer_count != 1) {
        throw std::invalid_argument(
            "relevance propagation needs single-layer decisions "
            "(decision_layers == 1); got " +
            std::to_string(m.decision_layer_count));
    }
}

} // namespace

std::vector<RelevanceVector> propagate_arrival_relevance(const TartModel& m,
                                                         std::span<const double> x) {
    require_explainable_decisions(m);
    const ModelEval eval = model_forward(m, x, nullptr);
    const std::vector<int> widths = layer_widths(m.shape);
    const size_t dim = x.size();

    // Root arrival is the constant 1: value 1, zero scores.
    std::vector<RelevanceVector> rel(1);
    rel[0].value = 1.0;
    rel[0].scores.assign(dim, 0.0);

    std::vector<double> column(static_cast<size_t>(m.shape.window));
    for (int d = 0; d < m.shape.depth; ++d) {
        const LocalTransition& b = eval.transitions[d];
        std::vector<RelevanceVector> next(static_cast<size_t>(widths[d + 1]));
        for (RelevanceVector& r : next) {
            r.value = 0.0;
            r.scores.assign(dim, 0.0);
        }
        for (int i = 0; i < widths[d]; ++i) {
            for (int w = 0; w < m.shape.window; ++w) column[w] = b(w, i);
            for (int w = 0; w < m.shape.window; ++w) {
                const int j = m.shape.stride * i + w;
                RelevanceVector r_t = decision_component_relevance(
                    m, m.decision_nets[d][i], x, column, w);
                next[j] = relevance_add(next[j], relevance_mul(r_t, rel[i]));
            }
        }
        rel = std::move(next);
    }
    return rel;
}

namespace {

// Relevance of leaf u's class_i probability. Linear leaves use the z+ rule;
// free-logit leaves are constants (zero scores).
RelevanceVector leaf_relevance(const TartModel& m, const ModelEval& eval,
                               std::span<const double> x, int u, int class_i) {
    if (m.leaf_layer_count == 0) {
        RelevanceVector r;
        r.value = eval.leaf_rows(u, class_i);
        r.scores.assign(x.size(), 0.0);
        return r;
    }
    return softmax_relevance(m.leaf_nets[u].layers.front().weights, x,
                             eval.leaf_rows.row(u), class_i);
}

int argmax_index(std::span<const double> v) {
    int best = 0;
    for (size_t i = 1; i < v.size(); ++i) {
        if (v[i] > v[best]) best = static_cast<int>(i);
    }
    return best;
}

} // namespace

std::vector<double> prediction_input_gradient(const TartModel& m,
                                              std::span<const double> x,
                                              int class_i) {
    if (class_i < 0 || class_i >= m.class_count) {
        throw std::invalid_argument("prediction_input_gradient: class out of range");
    }
    const ModelEval eval = model_forward(m, x, nullptr);
    const std::vector<double>& p_leaf = eval.arrivals.back();
    const int leaves = eval.leaf_rows.rows();
    std::vector<double> grad_x(x.size(), 0.0);
    const bool single = m.leaf_mode == LeafMode::single;
    const int chosen = argmax_index(p_leaf);

    // Leaf-side term: sum_u weight_u * d(g_u[class_i])/dx.
    for (int u = 0; u < leaves; ++u) {
        if (single && u != chosen) continue;
        const Mlp& net = m.leaf_nets[u];
        if (net.in_dim() == 0) continue;  // free logits do not depend on x
        const double weight_u = single ? 1.0 : p_leaf[u];
        std::vector<double> seed(static_cast<size_t>(m.class_count), 0.0);
        seed[static_cast<size_t>(class_i)] = weight_u;
        const std::vector<double> grad_logits =
            softmax_backward(eval.leaf_rows.row(u), seed);
        const MlpGrads g = mlp_backward(net, eval.leaf_caches[u], grad_logits);
        for (size_t k = 0; k < grad_x.size(); ++k) grad_x[k] += g.input[k];
    }

    // Routing-side term (multi mode only; the argmax is piecewise constant):
    // d(pred)/d(p_D(u)) = g_u[class_i], carried back through the chain.
    if (!single && m.decision_layer_count > 0 && m.shape.depth > 0) {
        std::vector<double> gp(static_cast<size_t>(leaves));
        for (int u = 0; u < leaves; ++u) gp[u] = eval.leaf_rows(u, class_i);
        std::vector<double> col(static_cast<size_t>(m.shape.window));
        std::vector<double> gcol(static_cast<size_t>(m.shape.window));
        for (int d = m.shape.depth - 1; d >= 0; --d) {
            const LocalTransition& b = eval.transitions[d];
            TconvGrads tg = tconv_backward(b, eval.arrivals[d], m.shape.stride, gp);
            for (int i = 0; i < b.cols(); ++i) {
                for (int w = 0; w < m.shape.window; ++w) {
                    col[w] = b(w, i);
                    gcol[w] = tg.b(w, i);
                }
                const std::vector<double> grad_logits =
                    decision_column_backward(m, col, gcol);
                const MlpGrads g = mlp_backward(m.decision_nets[d][i],
                                                eval.decision_caches[d][i], grad_logits);
                for (size_t k = 0; k < grad_x.size(); ++k) grad_x[k] += g.input[k];
            }
            gp = std::move(tg.p);
        }
    }
    return grad_x;
}

RelevanceReport explain_prediction(const TartModel& m, std::span<const double> x,
                                   bool allow_fallback) {
    const bool exact =
        (m.shape.depth == 0 || m.decision_layer_count == 1) && m.leaf_layer_count <= 1;
    if (!exact && !allow_fallback) {
        throw std::invalid_argument(
            "exact relevance needs single-layer decisions and at-most-linear "
            "leaves (decision_layers == 1, leaf_layers <= 1); rerun with the "
            "gradient-times-input fallback to force an approximate report");
    }

    RelevanceReport report;
    if (!exact) {
        const std::vector<double> pred = predict(m, x);
        const std::vector<double> p_leaf = arrival_probabilities(m, x);
        report.fallback = true;
        report.chosen_leaf = argmax_index(p_leaf);
        report.class_relevance.resize(static_cast<size_t>(m.class_count));
        for (int c = 0; c < m.class_count; ++c) {
            const std::vector<double> g = prediction_input_gradient(m, x, c);
            report.class_relevance[c] = linear_relevance(g, x, pred[c]);
        }
        return report;
    }

    const ModelEval eval = model_forward(m, x, nullptr);
    report.leaf_arrival = propagate_arrival_relevance(m, x);
    const std::vector<double>& p_leaf = eval.arrivals.back();
    report.chosen_leaf = argmax_index(p_leaf);
    report.class_relevance.resize(static_cast<size_t>(m.class_count));

    const int leaves = eval.leaf_rows.rows();
    for (int c = 0; c < m.class_count; ++c) {
        if (m.leaf_mode == LeafMode::single) {
            const int u = report.chosen_leaf;
            report.class_relevance[c] =
                relevance_mul(report.leaf_arrival[u], leaf_relevance(m, eval, x, u, c));
        } else {
            RelevanceVector sum;
            sum.value = 0.0;
            sum.scores.assign(x.size(), 0.0);
            for (int u = 0; u < leaves; ++u) {
                sum = relevance_add(sum, relevance_mul(report.leaf_arrival[u],
                                                       leaf_relevance(m, eval, x, u, c)));
            }
            report.class_relevance[c] = std::move(sum);
        }
    }
    return report;
}

ClassMeanRelevance class_mean_relevance(const TartModel& m, const Dataset& data,
                                        bool allow_fallback) {
    if (data.feature_count() != m.input_dim) {
        throw std::invalid_argument("class_mean_relevance: feature count mismatch");
    }
    ClassMeanRelevance cmr;
    cmr.means = Matrix(m.class_count, m.input_dim);
    cmr.class_seen.assign(static_cast<size_t>(m.class_count), false);
    std::vector<int> counts(static_cast<size_t>(m.class_count), 0);
    for (int r = 0; r < data.size(); ++r) {
        const int c = data.labels[r];
        if (c < 0 || c >= m.class_count) {
            throw std::invalid_argument("class_mean_relevance: label out of range");
        }
        const RelevanceReport report =
            explain_prediction(m, data.features.row(r), allow_fallback);
        for (int k = 0; k < m.input_dim; ++k) {
            cmr.means(c, k) += report.class_relevance[c].scores[k];
        }
        ++counts[c];
    }
    for (int c = 0; c < m.class_count; ++c) {
        if (counts[c] > 0) {
            cmr.class_seen[c] = true;
            for (int k = 0; k < m.input_dim; ++k) {
                cmr.means(c, k) /= counts[c];
            }
        }
    }
    return cmr;
}

namespace {

void print_num(std::ostream& out, double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    out << buf;
}

} // namespace

void write_relevance_rows(std::ostream& out,
                          const std::vector<RelevanceReport>& reports,
                          bool fallback) {
    out << "# method: "
        << (fallback ? "gradient-times-input (fallback)" : "relevance-propagation")
        << '\n';
    out << "example,class,feature,score\n";
    for (size_t e = 0; e < reports.size(); ++e) {
        const RelevanceReport& rep = reports[e];
        for (size_t c = 0; c < rep.class_relevance.size(); ++c) {
            const RelevanceVector& rv = rep.class_relevance[c];
            for (size_t k = 0; k < rv.scores.size(); ++k) {
                out << e << ',' << c << ',' << k << ',';
                print_num(out, rv.scores[k]);
                out << '\n';
            }
        }
    }
}

void write_class_means(std::ostream& out, const ClassMeanRelevance& cmr) {
    out << "class";
    for (int k = 0; k < cmr.means.cols(); ++k) out << ",feature_" << k;
    out << '\n';
    for (int c = 0; c < cmr.means.rows(); ++c) {
        out << c;
        for (int k = 0; k < cmr.means.cols(); ++k) {
            out << ',';
            print_num(out, cmr.means(c, k));
        }
        out << '\n';
    }
}

void write_leaf_table(std::ostream& out, const TartModel& m, const Dataset& data) {
    out << "example,node_layer1,leaf,label\n";
    for (int r = 0; r < data.size(); ++r) {
        const ModelEval eval = model_forward(m, data.features.row(r), nullptr);
        const int layer1 = m.shape.depth > 0 ? argmax_index(eval.arrivals[1]) : 0;
        const int leaf = argmax_index(eval.arrivals.back());
        out << r << ',' << layer1 << ',' << leaf << ',' << data.labels[r] << '\n';
    }
}

} // namespace tart
