#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "tart/data.hpp"
#include "tart/model.hpp"

namespace tart {

// Gradients mirroring a model's parameter structure.
struct ModelGrads {
    std::vector<std::vector<MlpGrads>> decisions;
    std::vector<MlpGrads> leaves;
};

ModelGrads zero_grads(const TartModel& m);

struct LossCache {
    ModelEval eval;
    std::vector<double> leaf_losses;  // cross entropy per leaf
    double loss = 0.0;
    int label = -1;
};

// Arrival-weighted sum of per-leaf cross entropies:
//   loss = sum_u p_D(u) * ce(leaf_row_u, label)
LossCache ensemble_loss(const TartModel& m, std::span<const double> x, int label,
                        Rng* rng = nullptr);

// Exact gradient of the ensemble loss with respect to every parameter:
// through the leaf softmaxes, back along the transposed-convolution chain,
// and through each decision normalization into its network.
ModelGrads backward_full(const TartModel& m, const LossCache& cache);
// Accumulates scale * gradient into acc.
void backward_full_into(const TartModel& m, const LossCache& cache, double scale,
                        ModelGrads& acc);

// Gradients flattened in for_each_param order.
std::vector<double> flatten_grads(const TartModel& m, const ModelGrads& grads);

struct AdamState {
    double lr = 0.005;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    long long step_count = 0;
    std::vector<double> first_moment;
    std::vector<double> second_moment;
};

AdamState make_adam_state(size_t total_params, double lr = 0.005);
AdamState make_adam_state(const TartModel& m, double lr = 0.005);

// Bias-corrected Adam update over a raw parameter span.
void adam_step(AdamState& state, std::span<double> params,
               std::span<const double> grads);
// Same update applied over a model's parameters in for_each_param order.
void adam_step(AdamState& state, TartModel& m, std::span<const double> flat_grads);

struct TrainConfig {
    int batch_size = 1024;
    int epochs = 100;
    uint64_t seed = 0;
    bool shuffle = true;
    double lr = 0.005;
};

struct FitResult {
    std::vector<double> loss_history;  // mean batch loss per epoch
};

// Mini-batch training loop: seeded shuffling, mean-gradient Adam updates,
// the last incomplete batch kept. Deterministic for a fixed seed. The model
// is left in infer mode.
FitResult fit(TartModel& m, const Dataset& train, const TrainConfig& cfg);

// Fraction of examples whose argmax prediction (under the model's leaf mode)
// matches the label; argmax ties go to the lowest class index.
double evaluate_accuracy(const TartModel& m, const Dataset& data);

// Two columns: epoch (1-based) and mean loss.
void write_loss_history(std::ostream& out, const std::vector<double>& history);

} // namespace tart
