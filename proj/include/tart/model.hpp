#pragma once

#include <array>
#include <span>
#include <string_view>
#include <vector>

#include "tart/nn.hpp"
#include "tart/tree.hpp"

namespace tart {

enum class LeafMode { multi, single };

// How decision logits become a column distribution over the window.
// softmax works for any window; sigmoid_pair is the classic two-way soft
// split [s, 1-s] from a single logit (window must be 2).
enum class DecisionNorm { softmax, sigmoid_pair };

// Tree classifier with one decision network per internal node and one
// classifier per leaf. Decision outputs are column-stochastic, so inference
// is a chain of transposed convolutions over arrival probabilities.
struct TartModel {
    TreeShape shape;
    int decision_layer_count = 1;  // layers in each decision net; 0 = uniform routing
    int leaf_layer_count = 1;      // layers in each leaf net; 0 = free logits
    int hidden_units = 100;
    int input_dim = 0;
    int class_count = 0;
    LeafMode leaf_mode = LeafMode::multi;
    DecisionNorm decision_norm = DecisionNorm::softmax;
    double dropout_prob = 0.15;

    // decision_nets[d][i] decides for node i of layer d; empty when
    // decision_layer_count == 0.
    std::vector<std::vector<Mlp>> decision_nets;
    std::vector<Mlp> leaf_nets;

    // Feature standardization fitted at training time; empty if the model
    // was trained on raw features.
    std::vector<double> feature_means;
    std::vector<double> feature_stds;

    std::vector<int> widths() const { return layer_widths(shape); }
    int leaf_count() const { return widths().back(); }
};

struct Preset {
    char name;
    int window, stride, depth;
    int decision_layers, leaf_layers;
    std::string_view property;
};

const std::array<Preset, 3>& presets();
const Preset& preset(char name);  // 'A', 'B' or 'C'

TartModel build_model(const TreeShape& shape, int decision_layers, int leaf_layers,
                      int input_dim, int class_count, int hidden_units,
                      LeafMode leaf_mode, Rng& rng,
                      DecisionNorm norm = DecisionNorm::softmax,
                      double dropout_prob = 0.15);

// Normalize one node's decision logits into a window-length distribution,
// and the matching backward map (gradient w.r.t. the logits).
std::vector<double> decision_column(const TartModel& m, std::span<const double> logits);
std::vector<double> decision_column_backward(const TartModel& m,
                                             std::span<const double> column,
                                             std::span<const double> grad_column);

// Everything one forward pass produces, kept for backpropagation.
struct ModelEval {
    std::vector<LocalTransition> transitions;          // B_d per layer
    std::vector<std::vector<MlpCache>> decision_caches;
    std::vector<std::vector<double>> arrivals;         // p_0 .. p_D
    std::vector<MlpCache> leaf_caches;
    Matrix leaf_rows;                                  // leaf_count x class_count
};

// Forward pass through decisions, the transposed-convolution chain, and the
// leaf classifiers. rng is only needed for train-mode dropout.
ModelEval model_forward(const TartModel& m, std::span<const double> x,
                        Rng* rng = nullptr);

// Pure inference entry points.
std::vector<LocalTransition> local_transitions(const TartModel& m,
                                               std::span<const double> x);
std::vector<double> arrival_probabilities(const TartModel& m,
                                          std::span<const double> x);
Matrix leaf_predictions(const TartModel& m, std::span<const double> x);

// Arrival-weighted mixture of the leaf predictions.
std::vector<double> predict_multi(const TartModel& m, std::span<const double> x);

struct SinglePrediction {
    std::vector<double> probs;
    int leaf = 0;  // argmax arrival probability, ties to the lowest index
};
SinglePrediction predict_single(const TartModel& m, std::span<const double> x);

// Prediction under the model's configured leaf mode.
std::vector<double> predict(const TartModel& m, std::span<const double> x);

enum class Family {
    logistic_regression,
    multilayer_perceptron,
    simple_ensemble,
    tree_type_1,
    tree_type_2,
    tree_type_3,
};

// Which classical classifier family a (depth, decision layers, leaf layers)
// combination reduces to.
Family classify_family(int depth, int decision_layers, int leaf_layers);
std::string_view family_name(Family f);

void set_mode(TartModel& m, MlpMode mode);

size_t param_count(const TartModel& m);

// Visits every parameter array (weights then bias, per layer, decisions
// before leaves) in a fixed order. F receives std::span<double> /
// std::span<const double>.
template <class ModelT, class F>
void for_each_param(ModelT& m, F&& f) {
    auto visit_net = [&](auto& net) {
        for (auto& layer : net.layers) {
            f(layer.weights.data());
            f(std::span(layer.bias));
        }
    };
    for (auto& layer_nets : m.decision_nets) {
        for (auto& net : layer_nets) visit_net(net);
    }
    for (auto& net : m.leaf_nets) visit_net(net);
}

} // namespace tart
