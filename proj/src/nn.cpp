#include "tart/nn.hpp"

#include <cmath>
#include <stdexcept>

namespace tart {

double elu(double z) {
    return z > 0.0 ? z : std::expm1(z);
}

double elu_grad(double z) {
    return z > 0.0 ? 1.0 : std::exp(z);
}

double sigmoid(double z) {
    if (z >= 0.0) {
        return 1.0 / (1.0 + std::exp(-z));
    }
    const double e = std::exp(z);
    return e / (1.0 + e);
}

std::vector<double> softmax(std::span<const double> z) {
    if (z.empty()) {
        throw std::invalid_argument("softmax: empty input");
    }
    double zmax = z[0];
    for (double v : z) zmax = std::max(zmax, v);
    std::vector<double> y(z.size());
    double sum = 0.0;
    for (size_t i = 0; i < z.size(); ++i) {
        y[i] = std::exp(z[i] - zmax);
        sum += y[i];
    }
    for (double& v : y) v /= sum;
    return y;
}

std::vector<double> softmax_backward(std::span<const double> y,
                                     std::span<const double> grad_out) {
    if (y.size() != grad_out.size()) {
        throw std::invalid_argument("softmax_backward: size mismatch");
    }
    const double s = dot(grad_out, y);
    std::vector<double> g(y.size());
    for (size_t i = 0; i < y.size(); ++i) {
        g[i] = y[i] * (grad_out[i] - s);
    }
    return g;
}

Matrix he_init(int out_dim, int in_dim, Rng& rng) {
    if (out_dim < 1 || in_dim < 1) {
        throw std::invalid_argument("he_init: dimensions must be positive");
    }
    const double stddev = std::sqrt(2.0 / static_cast<double>(in_dim));
    Matrix w(out_dim, in_dim);
    for (double& v : w.data()) {
        v = stddev * normal_draw(rng);
    }
    return w;
}

Mlp make_mlp(int in_dim, int out_dim, int layer_count, int hidden_units,
             double dropout_prob, Rng& rng) {
    if (layer_count < 1) {
        throw std::invalid_argument("make_mlp: layer_count must be >= 1");
    }
    if (in_dim < 1 || out_dim < 1) {
        throw std::invalid_argument("make_mlp: dimensions must be positive");
    }
    if (layer_count > 1 && hidden_units < 1) {
        throw std::invalid_argument("make_mlp: hidden_units must be positive");
    }
    if (dropout_prob < 0.0 || dropout_prob >= 1.0) {
        throw std::invalid_argument("make_mlp: dropout_prob must be in [0,1)");
    }
    Mlp m;
    m.dropout_prob = dropout_prob;
    int prev = in_dim;
    for (int l = 0; l < layer_count; ++l) {
        const bool last = (l == layer_count - 1);
        const int out = last ? out_dim : hidden_units;
        DenseLayer layer;
        layer.weights = he_init(out, prev, rng);
        layer.bias.assign(static_cast<size_t>(out), 0.0);
        layer.activation = last ? Activation::identity : Activation::elu;
        m.layers.push_back(std::move(layer));
        prev = out;
    }
    return m;
}

Mlp make_free_logits(int out_dim) {
    if (out_dim < 1) {
        throw std::invalid_argument("make_free_logits: out_dim must be positive");
    }
    Mlp m;
    DenseLayer layer;
    layer.weights = Matrix(out_dim, 0);
    layer.bias.assign(static_cast<size_t>(out_dim), 0.0);
    layer.activation = Activation::identity;
    m.layers.push_back(std::move(layer));
    return m;
}

namespace {

void apply_activation(Activation act, std::vector<double>& v) {
    if (act == Activation::elu) {
        for (double& z : v) z = elu(z);
    }
}

} // namespace

MlpCache mlp_forward(const Mlp& m, std::span<const double> x, Rng* rng) {
    if (m.layers.empty()) {
        throw std::invalid_argument("mlp_forward: empty network");
    }
    if (static_cast<int>(x.size()) != m.in_dim()) {
        throw std::invalid_argument("mlp_forward: input dimension mismatch");
    }
    const size_t nlayers = m.layers.size();
    const bool dropping =
        m.mode == MlpMode::train && m.dropout_prob > 0.0 && nlayers > 1;
    if (dropping && rng == nullptr) {
        throw std::invalid_argument("mlp_forward: train-mode dropout needs an rng");
    }

    MlpCache cache;
    cache.input.assign(x.begin(), x.end());
    cache.pre.resize(nlayers);
    cache.post.resize(nlayers);
    cache.mask.resize(nlayers);

    std::span<const double> cur = cache.input;
    for (size_t l = 0; l < nlayers; ++l) {
        const DenseLayer& layer = m.layers[l];
        std::vector<double> z = matvec(layer.weights, cur);
        for (int r = 0; r < layer.out_dim(); ++r) z[r] += layer.bias[r];
        cache.pre[l] = z;
        apply_activation(layer.activation, z);
        const bool hidden = l + 1 < nlayers;
        if (hidden && dropping) {
            const double keep = 1.0 - m.dropout_prob;
            std::vector<double> mask(z.size());
            for (size_t i = 0; i < z.size(); ++i) {
                mask[i] = uniform_draw(*rng) < keep ? 1.0 / keep : 0.0;
                z[i] *= mask[i];
            }
            cache.mask[l] = std::move(mask);
        }
        cache.post[l] = std::move(z);
        cur = cache.post[l];
    }
    return cache;
}

std::vector<double> mlp_infer(const Mlp& m, std::span<const double> x) {
    if (m.layers.empty()) {
        throw std::invalid_argument("mlp_infer: empty network");
    }
    if (static_cast<int>(x.size()) != m.in_dim()) {
        throw std::invalid_argument("mlp_infer: input dimension mismatch");
    }
    std::vector<double> cur(x.begin(), x.end());
    for (const DenseLayer& layer : m.layers) {
        std::vector<double> z = matvec(layer.weights, cur);
        for (int r = 0; r < layer.out_dim(); ++r) z[r] += layer.bias[r];
        apply_activation(layer.activation, z);
        cur = std::move(z);
    }
    return cur;
}

MlpGrads mlp_grads_like(const Mlp& m) {
    MlpGrads g;
    g.weights.reserve(m.layers.size());
    g.bias.reserve(m.layers.size());
    for (const DenseLayer& layer : m.layers) {
        g.weights.emplace_back(layer.out_dim(), layer.in_dim());
        g.bias.emplace_back(static_cast<size_t>(layer.out_dim()), 0.0);
    }
    g.input.assign(static_cast<size_t>(m.in_dim()), 0.0);
    return g;
}

void mlp_backward_into(const Mlp& m, const MlpCache& cache,
                       std::span<const double> grad_logits, double scale,
                       MlpGrads& acc) {
    const size_t nlayers = m.layers.size();
    if (cache.pre.size() != nlayers ||
        static_cast<int>(grad_logits.size()) != m.out_dim()) {
        throw std::invalid_argument("mlp_backward: cache/shape mismatch");
    }
    std::vector<double> g(grad_logits.begin(), grad_logits.end());
    for (double& v : g) v *= scale;

    for (size_t l = nlayers; l-- > 0;) {
        const DenseLayer& layer = m.layers[l];
        const bool hidden = l + 1 < nlayers;
        if (hidden && !cache.mask[l].empty()) {
            for (size_t i = 0; i < g.size(); ++i) g[i] *= cache.mask[l][i];
        }
        if (layer.activation == Activation::elu) {
            for (size_t i = 0; i < g.size(); ++i) g[i] *= elu_grad(cache.pre[l][i]);
        }
        std::span<const double> in =
            l == 0 ? std::span<const double>(cache.input) : cache.post[l - 1];
        Matrix& gw = acc.weights[l];
        std::vector<double>& gb = acc.bias[l];
        for (int r = 0; r < layer.out_dim(); ++r) {
            gb[r] += g[r];
            for (int c = 0; c < layer.in_dim(); ++c) {
                gw(r, c) += g[r] * in[c];
            }
        }
        // grad w.r.t. this layer's input
        std::vector<double> gin(static_cast<size_t>(layer.in_dim()), 0.0);
        for (int r = 0; r < layer.out_dim(); ++r) {
            for (int c = 0; c < layer.in_dim(); ++c) {
                gin[c] += layer.weights(r, c) * g[r];
            }
        }
        if (l == 0) {
            for (size_t i = 0; i < gin.size(); ++i) acc.input[i] += gin[i];
        }
        g = std::move(gin);
    }
}

MlpGrads mlp_backward(const Mlp& m, const MlpCache& cache,
                      std::span<const double> grad_logits) {
    MlpGrads acc = mlp_grads_like(m);
    mlp_backward_into(m, cache, grad_logits, 1.0, acc);
    return acc;
}

CrossEntropy cross_entropy(std::span<const double> pred, int label) {
    if (label < 0 || static_cast<size_t>(label) >= pred.size()) {
        throw std::invalid_argument("cross_entropy: label out of range");
    }
    constexpr double kEps = 1e-12;
    CrossEntropy ce;
    ce.grad_pred.assign(pred.size(), 0.0);
    const double p = pred[label];
    ce.loss = -std::log(std::max(p, kEps));
    if (p > kEps) {
        ce.grad_pred[label] = -1.0 / p;
    }
    return ce;
}

} // namespace tart
