#include "tart/train.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <ostream>
#include <stdexcept>

namespace tart {

ModelGrads zero_grads(const TartModel& m) {
    ModelGrads g;
    g.decisions.resize(m.decision_nets.size());
    for (size_t d = 0; d < m.decision_nets.size(); ++d) {
        g.decisions[d].reserve(m.decision_nets[d].size());
        for (const Mlp& net : m.decision_nets[d]) {
            g.decisions[d].push_back(mlp_grads_like(net));
        }
    }
    g.leaves.reserve(m.leaf_nets.size());
    for (const Mlp& net : m.leaf_nets) {
        g.leaves.push_back(mlp_grads_like(net));
    }
    return g;
}

LossCache ensemble_loss(const TartModel& m, std::span<const double> x, int label,
                        Rng* rng) {
    if (label < 0 || label >= m.class_count) {
        throw std::invalid_argument("ensemble_loss: label out of range");
    }
    LossCache cache;
    cache.label = label;
    cache.eval = model_forward(m, x, rng);
    const std::vector<double>& p = cache.eval.arrivals.back();
    const int leaves = cache.eval.leaf_rows.rows();
    cache.leaf_losses.resize(static_cast<size_t>(leaves));
    double loss = 0.0;
    for (int u = 0; u < leaves; ++u) {
        cache.leaf_losses[u] = cross_entropy(cache.eval.leaf_rows.row(u), label).loss;
        loss += p[u] * cache.leaf_losses[u];
    }
    cache.loss = loss;
    return cache;
}

void backward_full_into(const TartModel& m, const LossCache& cache, double scale,
                        ModelGrads& acc) {
    const ModelEval& eval = cache.eval;
    if (eval.arrivals.size() != static_cast<size_t>(m.shape.depth) + 1 ||
        eval.leaf_rows.rows() != m.leaf_count()) {
        throw std::invalid_argument("backward_full: stale or mismatched cache");
    }
    const std::vector<double>& p_leaf = eval.arrivals.back();
    const int leaves = eval.leaf_rows.rows();

    // Leaf classifiers: d(loss)/d(row_u) = p_D(u) * d(ce_u)/d(row_u).
    for (int u = 0; u < leaves; ++u) {
        const auto row = eval.leaf_rows.row(u);
        CrossEntropy ce = cross_entropy(row, cache.label);
        for (double& v : ce.grad_pred) v *= p_leaf[u];
        const std::vector<double> grad_logits = softmax_backward(row, ce.grad_pred);
        mlp_backward_into(m.leaf_nets[u], eval.leaf_caches[u], grad_logits, scale,
                          acc.leaves[u]);
    }

    if (m.decision_layer_count == 0 || m.shape.depth == 0) {
        return;  // uniform routing carries no decision parameters
    }

    // Arrival probabilities: d(loss)/d(p_D(u)) = ce_u, then back along the
    // chain, peeling one local transition per layer.
    std::vector<double> gp = cache.leaf_losses;
    for (int d = m.shape.depth - 1; d >= 0; --d) {
        const LocalTransition& b = eval.transitions[d];
        TconvGrads tg = tconv_backward(b, eval.arrivals[d], m.shape.stride, gp);
        const int nodes = b.cols();
        std::vector<double> col(static_cast<size_t>(m.shape.window));
        std::vector<double> gcol(static_cast<size_t>(m.shape.window));
        for (int i = 0; i < nodes; ++i) {
            for (int w = 0; w < m.shape.window; ++w) {
                col[w] = b(w, i);
                gcol[w] = tg.b(w, i);
            }
            const std::vector<double> grad_logits =
                decision_column_backward(m, col, gcol);
            mlp_backward_into(m.decision_nets[d][i], eval.decision_caches[d][i],
                              grad_logits, scale, acc.decisions[d][i]);
        }
        gp = std::move(tg.p);
    }
}

ModelGrads backward_full(const TartModel& m, const LossCache& cache) {
    ModelGrads acc = zero_grads(m);
    backward_full_into(m, cache, 1.0, acc);
    return acc;
}

std::vector<double> flatten_grads(const TartModel& m, const ModelGrads& grads) {
    std::vector<double> flat;
    flat.reserve(param_count(m));
    auto push_net = [&](const MlpGrads& g) {
        for (size_t l = 0; l < g.weights.size(); ++l) {
            const auto w = g.weights[l].data();
            flat.insert(flat.end(), w.begin(), w.end());
            flat.insert(flat.end(), g.bias[l].begin(), g.bias[l].end());
        }
    };
    for (const auto& layer : grads.decisions) {
        for (const MlpGrads& g : layer) push_net(g);
    }
    for (const MlpGrads& g : grads.leaves) push_net(g);
    return flat;
}

AdamState make_adam_state(size_t total_params, double lr) {
    AdamState s;
    s.lr = lr;
    s.first_moment.assign(total_params, 0.0);
    s.second_moment.assign(total_params, 0.0);
    return s;
}

AdamState make_adam_state(const TartModel& m, double lr) {
    return make_adam_state(param_count(m), lr);
}

namespace {

void adam_update_span(AdamState& state, size_t offset, std::span<double> params,
                      std::span<const double> grads) {
    const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step_count));
    const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step_count));
    for (size_t k = 0; k < params.size(); ++k) {
        double& mk = state.first_moment[offset + k];
        double& vk = state.second_moment[offset + k];
        const double g = grads[k];
        mk = state.beta1 * mk + (1.0 - state.beta1) * g;
        vk = state.beta2 * vk + (1.0 - state.beta2) * g * g;
        params[k] -= state.lr * (mk / bc1) / (std::sqrt(vk / bc2) + state.eps);
    }
}

} // namespace

void adam_step(AdamState& state, std::span<double> params,
               std::span<const double> grads) {
    if (params.size() != grads.size() || params.size() != state.first_moment.size()) {
        throw std::invalid_argument("adam_step: shape mismatch");
    }
    ++state.step_count;
    adam_update_span(state, 0, params, grads);
}

void adam_step(AdamState& state, TartModel& m, std::span<const double> flat_grads) {
    if (flat_grads.size() != state.first_moment.size()) {
        throw std::invalid_argument("adam_step: gradient length mismatch");
    }
    ++state.step_count;
    size_t offset = 0;
    for_each_param(m, [&](std::span<double> p) {
        adam_update_span(state, offset, p, flat_grads.subspan(offset, p.size()));
        offset += p.size();
    });
    if (offset != flat_grads.size()) {
        throw std::invalid_argument("adam_step: parameter walk mismatch");
    }
}

FitResult fit(TartModel& m, const Dataset& train, const TrainConfig& cfg) {
    if (train.size() == 0) {
        throw std::invalid_argument("fit: empty dataset");
    }
    if (train.feature_count() != m.input_dim) {
        throw std::invalid_argument("fit: dataset has " +
                                    std::to_string(train.feature_count()) +
                                    " features, model expects " +
                                    std::to_string(m.input_dim));
    }
    for (int label : train.labels) {
        if (label < 0 || label >= m.class_count) {
            throw std::invalid_argument("fit: label out of model class range");
        }
    }
    if (cfg.batch_size < 1 || cfg.epochs < 1) {
        throw std::invalid_argument("fit: batch_size and epochs must be >= 1");
    }

    set_mode(m, MlpMode::train);
    Rng rng(cfg.seed);
    AdamState adam = make_adam_state(m, cfg.lr);
    ModelGrads acc = zero_grads(m);

    const int n = train.size();
    std::vector<int> order(static_cast<size_t>(n));
    std::iota(order.begin(), order.end(), 0);

    FitResult result;
    result.loss_history.reserve(static_cast<size_t>(cfg.epochs));
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        if (cfg.shuffle) {
            std::shuffle(order.begin(), order.end(), rng);
        }
        double epoch_loss = 0.0;
        int batches = 0;
        for (int start = 0; start < n; start += cfg.batch_size) {
            const int stop = std::min(n, start + cfg.batch_size);
            const double inv = 1.0 / static_cast<double>(stop - start);
            acc = zero_grads(m);
            double batch_loss = 0.0;
            for (int k = start; k < stop; ++k) {
                const int idx = order[static_cast<size_t>(k)];
                LossCache cache =
                    ensemble_loss(m, train.features.row(idx), train.labels[idx], &rng);
                batch_loss += cache.loss;
                backward_full_into(m, cache, inv, acc);
            }
            const std::vector<double> flat = flatten_grads(m, acc);
            adam_step(adam, m, flat);
            epoch_loss += batch_loss * inv;
            ++batches;
        }
        result.loss_history.push_back(epoch_loss / batches);
    }
    set_mode(m, MlpMode::infer);
    return result;
}

double evaluate_accuracy(const TartModel& m, const Dataset& data) {
    if (data.feature_count() != m.input_dim) {
        throw std::invalid_argument("evaluate_accuracy: dataset has " +
                                    std::to_string(data.feature_count()) +
                                    " features, model expects " +
                                    std::to_string(m.input_dim));
    }
    if (data.size() == 0) {
        throw std::invalid_argument("evaluate_accuracy: empty dataset");
    }
    int correct = 0;
    for (int r = 0; r < data.size(); ++r) {
        const std::vector<double> probs = predict(m, data.features.row(r));
        int arg = 0;
        for (size_t c = 1; c < probs.size(); ++c) {
            if (probs[c] > probs[arg]) arg = static_cast<int>(c);
        }
        if (arg == data.labels[r]) ++correct;
    }
    return static_cast<double>(correct) / data.size();
}

void write_loss_history(std::ostream& out, const std::vector<double>& history) {
    char buf[64];
    for (size_t e = 0; e < history.size(); ++e) {
        std::snprintf(buf, sizeof(buf), "%zu %.17g\n", e + 1, history[e]);
        out << buf;
    }
}

} // namespace tart
