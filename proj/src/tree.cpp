#include "tart/tree.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace tart {

void TreeShape::validate() const {
    if (window < 1) {
        throw std::invalid_argument("tree shape: window must be >= 1");
    }
    if (stride < 1) {
        throw std::invalid_argument("tree shape: stride must be >= 1");
    }
    if (stride > window) {
        throw std::invalid_argument("tree shape: stride must not exceed window");
    }
    if (depth < 0) {
        throw std::invalid_argument("tree shape: depth must be >= 0");
    }
}

std::vector<int> layer_widths(const TreeShape& shape) {
    shape.validate();
    std::vector<int> widths(static_cast<size_t>(shape.depth) + 1);
    widths[0] = 1;
    for (int d = 0; d < shape.depth; ++d) {
        widths[d + 1] = shape.stride * (widths[d] - 1) + shape.window;
    }
    return widths;
}

bool is_column_stochastic(const Matrix& m, double tol) {
    for (int c = 0; c < m.cols(); ++c) {
        double sum = 0.0;
        for (int r = 0; r < m.rows(); ++r) {
            const double v = m(r, c);
            if (v < 0.0) return false;
            sum += v;
        }
        if (std::abs(sum - 1.0) > tol) return false;
    }
    return true;
}

namespace {

void check_tconv_args(const Matrix& b, size_t p_len, int stride) {
    if (b.rows() < 1 || b.cols() < 1) {
        throw std::invalid_argument("tconv: empty local transition");
    }
    if (stride < 1 || stride > b.rows()) {
        throw std::invalid_argument("tconv: stride must be in [1, window]");
    }
    if (p_len != static_cast<size_t>(b.cols())) {
        throw std::invalid_argument("tconv: arrival vector length " +
                                    std::to_string(p_len) + " != node count " +
                                    std::to_string(b.cols()));
    }
}

} // namespace

std::vector<double> tconv_forward(const LocalTransition& b,
                                  std::span<const double> p, int stride) {
    check_tconv_args(b, p.size(), stride);
    const int window = b.rows();
    const int nodes = b.cols();
    std::vector<double> out(static_cast<size_t>(stride) * (nodes - 1) + window, 0.0);
    int j = 0;
    for (int i = 0; i < nodes; ++i) {
        const double pi = p[i];
        for (int w = 0; w < window; ++w) {
            out[j + w] += pi * b(w, i);
        }
        j += stride;
    }
    return out;
}

TconvGrads tconv_backward(const LocalTransition& b, std::span<const double> p,
                          int stride, std::span<const double> grad_out) {
    check_tconv_args(b, p.size(), stride);
    const int window = b.rows();
    const int nodes = b.cols();
    const size_t out_len = static_cast<size_t>(stride) * (nodes - 1) + window;
    if (grad_out.size() != out_len) {
        throw std::invalid_argument("tconv_backward: grad_out length mismatch");
    }
    TconvGrads g;
    g.b = Matrix(window, nodes);
    g.p.assign(static_cast<size_t>(nodes), 0.0);
    for (int i = 0; i < nodes; ++i) {
        const int j = stride * i;
        double gp = 0.0;
        for (int w = 0; w < window; ++w) {
            g.b(w, i) = p[i] * grad_out[j + w];
            gp += b(w, i) * grad_out[j + w];
        }
        g.p[i] = gp;
    }
    return g;
}

Matrix materialize_transition(const LocalTransition& b, int stride) {
    check_tconv_args(b, static_cast<size_t>(b.cols()), stride);
    const int window = b.rows();
    const int nodes = b.cols();
    Matrix t(stride * (nodes - 1) + window, nodes);
    for (int i = 0; i < nodes; ++i) {
        for (int w = 0; w < window; ++w) {
            t(stride * i + w, i) = b(w, i);
        }
    }
    return t;
}

std::vector<double> naive_chain(const std::vector<Matrix>& transitions,
                                std::vector<double> p0) {
    std::vector<double> p = std::move(p0);
    for (const Matrix& t : transitions) {
        if (t.cols() != static_cast<int>(p.size())) {
            throw std::invalid_argument("naive_chain: dimension mismatch");
        }
        p = matvec(t, p);
    }
    return p;
}

} // namespace tart
