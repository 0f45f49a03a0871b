#pragma once

#include <span>
#include <vector>

#include "tart/matrix.hpp"
#include "tart/rng.hpp"

namespace tart {

enum class Activation { elu, identity };
enum class MlpMode { train, infer };

struct DenseLayer {
    Matrix weights;            // out_dim x in_dim
    std::vector<double> bias;  // out_dim
    Activation activation = Activation::identity;

    int in_dim() const { return weights.cols(); }
    int out_dim() const { return weights.rows(); }
};

// Stack of dense layers. Hidden layers use ELU; the final layer is identity
// and emits raw logits (callers normalize). Dropout is inverted and applies
// to hidden activations only, so inference needs no rescaling.
struct Mlp {
    std::vector<DenseLayer> layers;
    double dropout_prob = 0.0;
    MlpMode mode = MlpMode::infer;

    int in_dim() const { return layers.empty() ? 0 : layers.front().in_dim(); }
    int out_dim() const { return layers.empty() ? 0 : layers.back().out_dim(); }
};

double elu(double z);
// Derivative of elu given the pre-activation value.
double elu_grad(double z);

double sigmoid(double z);

// Numerically stable softmax (max subtraction).
std::vector<double> softmax(std::span<const double> z);
// Gradient of <grad_out, softmax(z)> with respect to z, given y = softmax(z).
std::vector<double> softmax_backward(std::span<const double> y,
                                     std::span<const double> grad_out);

// Weight matrix with entries drawn from N(0, 2/in_dim).
Matrix he_init(int out_dim, int in_dim, Rng& rng);

// layer_count >= 1 dense layers: layer_count-1 hidden ELU layers of
// hidden_units, then an identity output layer. Weights He-initialized,
// biases zero.
Mlp make_mlp(int in_dim, int out_dim, int layer_count, int hidden_units,
             double dropout_prob, Rng& rng);

// Trainable logit vector with no input dependence: a single bias-only layer
// of in_dim 0, initialized to zero.
Mlp make_free_logits(int out_dim);

struct MlpCache {
    std::vector<double> input;
    std::vector<std::vector<double>> pre;   // pre-activation per layer
    std::vector<std::vector<double>> post;  // activation after dropout per layer
    std::vector<std::vector<double>> mask;  // dropout scale per hidden layer (empty if unused)

    const std::vector<double>& logits() const { return post.back(); }
};

// Forward pass recording everything backward needs. In train mode with a
// positive dropout probability and at least one hidden layer, rng must be
// non-null; in infer mode the result is a pure function of (parameters, x).
MlpCache mlp_forward(const Mlp& m, std::span<const double> x, Rng* rng = nullptr);

// Pure inference path; ignores m.mode and never applies dropout.
std::vector<double> mlp_infer(const Mlp& m, std::span<const double> x);

struct MlpGrads {
    std::vector<Matrix> weights;
    std::vector<std::vector<double>> bias;
    std::vector<double> input;  // gradient with respect to x
};

MlpGrads mlp_grads_like(const Mlp& m);

// Exact gradient of <grad_logits, logits> with respect to x and every
// parameter, for the forward pass recorded in cache.
MlpGrads mlp_backward(const Mlp& m, const MlpCache& cache,
                      std::span<const double> grad_logits);
// Same, accumulating scale * gradient into acc (input gradient included).
void mlp_backward_into(const Mlp& m, const MlpCache& cache,
                       std::span<const double> grad_logits, double scale,
                       MlpGrads& acc);

struct CrossEntropy {
    double loss = 0.0;
    std::vector<double> grad_pred;
};

// loss = -log(max(pred[label], 1e-12)); the gradient is zero inside the clamp.
CrossEntropy cross_entropy(std::span<const double> pred, int label);

} // namespace tart
