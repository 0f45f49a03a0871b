#include "tart/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>

#include "tart/tree.hpp"

namespace tart {

namespace {

#if defined(__GNUC__) || defined(__clang__)
template <typename T>
inline void do_not_optimize(const T& value) {
    asm volatile("" : : "g"(value) : "memory");
}
#else
template <typename T>
inline void do_not_optimize(const T& value) {
    volatile T sink = value;
    (void)sink;
}
#endif

double now_seconds() {
    return std::chrono::duration<double>(
               std::chrono::steady_clock::now().time_since_epoch())
        .count();
}

// One example's decision stack: a column-stochastic window x N_d matrix per
// layer, as a model would produce for one input.
using TransitionStack = std::vector<Matrix>;

TransitionStack random_stack(const std::vector<int>& widths, int window, Rng& rng) {
    TransitionStack stack;
    stack.reserve(widths.size() - 1);
    for (size_t d = 0; d + 1 < widths.size(); ++d) {
        Matrix b(window, widths[d]);
        for (int i = 0; i < widths[d]; ++i) {
            double sum = 0.0;
            for (int w = 0; w < window; ++w) {
                b(w, i) = uniform_draw(rng) + 1e-6;
                sum += b(w, i);
            }
            for (int w = 0; w < window; ++w) b(w, i) /= sum;
        }
        stack.push_back(std::move(b));
    }
    return stack;
}

// Transposed-convolution pass for one example; ping-pong buffers reused
// across the batch.
void tconv_pass(const TransitionStack& stack, int stride, std::vector<double>& cur,
                std::vector<double>& next, std::vector<double>& out) {
    cur.assign(1, 1.0);
    for (const Matrix& b : stack) {
        const int window = b.rows();
        const int nodes = b.cols();
        next.assign(static_cast<size_t>(stride) * (nodes - 1) + window, 0.0);
        int j = 0;
        for (int i = 0; i < nodes; ++i) {
            const double pi = cur[i];
            for (int w = 0; w < window; ++w) {
                next[j + w] += pi * b(w, i);
            }
            j += stride;
        }
        std::swap(cur, next);
    }
    out = cur;
}

// Materialized-matrix pass: builds the dense transition matrix of every
// layer (zero fill plus placement) and runs dense matrix-vector products.
// The dense buffers are preallocated once; filling them is part of the work
// being measured, allocation is not.
void naive_pass(const TransitionStack& stack, int stride,
                std::vector<Matrix>& dense, std::vector<double>& cur,
                std::vector<double>& next, std::vector<double>& out) {
    cur.assign(1, 1.0);
    for (size_t d = 0; d < stack.size(); ++d) {
        const Matrix& b = stack[d];
        const int window = b.rows();
        const int nodes = b.cols();
        Matrix& t = dense[d];
        t.fill(0.0);
        for (int i = 0; i < nodes; ++i) {
            for (int w = 0; w < window; ++w) {
                t(stride * i + w, i) = b(w, i);
            }
        }
        next.resize(static_cast<size_t>(t.rows()));
        matvec_into(t, cur, next);
        std::swap(cur, next);
    }
    out = cur;
}

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const size_t n = v.size();
    return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

} // namespace

std::vector<BenchRow> run_bench(const BenchConfig& cfg, double equivalence_tol) {
    if (cfg.batch < 1 || cfg.repeats < 1) {
        throw std::invalid_argument("bench: batch and repeats must be >= 1");
    }
    std::vector<BenchRow> rows;
    for (int depth : cfg.depths) {
        const TreeShape shape{cfg.window, cfg.stride, depth};
        const std::vector<int> widths = layer_widths(shape);
        long long nodes = 0;
        for (int w : widths) nodes += w;

        Rng rng(cfg.seed + static_cast<uint64_t>(depth));
        std::vector<TransitionStack> batch;
        batch.reserve(static_cast<size_t>(cfg.batch));
        for (int e = 0; e < cfg.batch; ++e) {
            batch.push_back(random_stack(widths, cfg.window, rng));
        }

        std::vector<Matrix> dense;
        dense.reserve(widths.size() - 1);
        for (size_t d = 0; d + 1 < widths.size(); ++d) {
            dense.emplace_back(widths[d + 1], widths[d]);
        }
        std::vector<double> cur, next, out_tconv, out_naive;
        cur.reserve(static_cast<size_t>(widths.back()));
        next.reserve(static_cast<size_t>(widths.back()));

        // Equivalence gate doubles as the warmup pass.
        double max_diff = 0.0;
        for (const TransitionStack& stack : batch) {
            tconv_pass(stack, cfg.stride, cur, next, out_tconv);
            naive_pass(stack, cfg.stride, dense, cur, next, out_naive);
            for (size_t k = 0; k < out_tconv.size(); ++k) {
                max_diff = std::max(max_diff, std::abs(out_tconv[k] - out_naive[k]));
            }
        }
        if (max_diff > equivalence_tol) {
            throw std::runtime_error("bench: paths disagree beyond tolerance at depth " +
                                     std::to_string(depth));
        }

        auto time_path = [&](auto&& pass_batch) {
            std::vector<double> samples;
            samples.reserve(static_cast<size_t>(cfg.repeats));
            for (int rep = 0; rep < cfg.repeats; ++rep) {
                const double t0 = now_seconds();
                pass_batch();
                const double t1 = now_seconds();
                samples.push_back(t1 - t0);
            }
            return median(samples);
        };

        double checksum = 0.0;
        const double t_naive = time_path([&] {
            for (const TransitionStack& stack : batch) {
                naive_pass(stack, cfg.stride, dense, cur, next, out_naive);
                checksum += out_naive[0];
            }
        });
        const double t_tconv = time_path([&] {
            for (const TransitionStack& stack : batch) {
                tconv_pass(stack, cfg.stride, cur, next, out_tconv);
                checksum += out_tconv[0];
            }
        });
        do_not_optimize(checksum);

        const double speedup = t_tconv > 0.0 ? t_naive / t_tconv : 0.0;
        rows.push_back({depth, "naive", nodes, t_naive, 1.0});
        rows.push_back({depth, "tconv", nodes, t_tconv, speedup});
    }
    return rows;
}

void write_bench_csv(std::ostream& out, const std::vector<BenchRow>& rows) {
    out << "depth,path,nodes,seconds,speedup\n";
    char buf[96];
    for (const BenchRow& r : rows) {
        std::snprintf(buf, sizeof(buf), "%d,%s,%lld,%.6g,%.4g\n", r.depth,
                      r.path.c_str(), r.nodes, r.seconds, r.speedup);
        out << buf;
    }
}

} // namespace tart
