#pragma once

#include <span>
#include <vector>

#include "tart/matrix.hpp"

namespace tart {

// Structural parameters of a tree: each node spreads its arrival mass over a
// window of `window` children, and adjacent nodes' windows start `stride`
// apart. stride < window makes children shared between neighboring parents;
// stride == window gives disjoint branches.
struct TreeShape {
    int window = 2;
    int stride = 2;
    int depth = 0;

    void validate() const;
};

// Node counts per layer, length depth+1. N_0 = 1 and
// N_{d+1} = stride * (N_d - 1) + window.
std::vector<int> layer_widths(const TreeShape& shape);

// A local transition matrix stacks the per-node decision outputs of one
// layer: column i holds node i's distribution over its window children, so
// every column is nonnegative and sums to 1.
using LocalTransition = Matrix;

bool is_column_stochastic(const Matrix& m, double tol = 1e-9);

// Transposed-convolution spreading: applies the local transition b
// (window x N_d) to the arrival vector p (length N_d) and returns the
// arrival vector of the next layer (length stride*(N_d-1)+window) without
// materializing the full transition matrix. Overlapping windows accumulate
// additively; the output stays on the simplex when the inputs do.
std::vector<double> tconv_forward(const LocalTransition& b,
                                  std::span<const double> p, int stride);

struct TconvGrads {
    Matrix b;               // window x N_d
    std::vector<double> p;  // length N_d
};

// Adjoint of tconv_forward as a linear map in (b, p):
//   grad_b[w][i] = p[i] * grad_out[stride*i + w]
//   grad_p[i]    = sum_w b[w][i] * grad_out[stride*i + w]
TconvGrads tconv_backward(const LocalTransition& b, std::span<const double> p,
                          int stride, std::span<const double> grad_out);

// Full (N_{d+1} x N_d) transition matrix: column i of b lands at rows
// [stride*i, stride*i + window) of column i. Reference path only; the fast
// path never builds this.
Matrix materialize_transition(const LocalTransition& b, int stride);

// Sequential dense matrix-vector products through a chain of full transition
// matrices. Slow oracle and benchmark baseline.
std::vector<double> naive_chain(const std::vector<Matrix>& transitions,
                                std::vector<double> p0);

} // namespace tart
