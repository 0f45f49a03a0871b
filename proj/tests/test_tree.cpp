#include <doctest.h>

#include <cmath>

#include "support/finite_diff.hpp"
#include "tart/rng.hpp"
#include "tart/tree.hpp"

using namespace tart;

TEST_SUITE_BEGIN("tree");

namespace {

Matrix random_stochastic(int window, int nodes, Rng& rng) {
    Matrix b(window, nodes);
    for (int i = 0; i < nodes; ++i) {
        double sum = 0.0;
        for (int w = 0; w < window; ++w) {
            b(w, i) = uniform_draw(rng) + 1e-6;
            sum += b(w, i);
        }
        for (int w = 0; w < window; ++w) b(w, i) /= sum;
    }
    return b;
}

std::vector<double> random_simplex(int n, Rng& rng) {
    std::vector<double> p(static_cast<size_t>(n));
    double sum = 0.0;
    for (double& v : p) {
        v = uniform_draw(rng) + 1e-6;
        sum += v;
    }
    for (double& v : p) v /= sum;
    return p;
}

} // namespace

TEST_CASE("layer_widths recurrence") {
    CHECK(layer_widths({2, 2, 3}) == std::vector<int>{1, 2, 4, 8});
    CHECK(layer_widths({3, 2, 3}) == std::vector<int>{1, 3, 7, 15});
    CHECK(layer_widths({1, 1, 5}) == std::vector<int>{1, 1, 1, 1, 1, 1});

    // binary tree: 2^d; ternary window with stride 2: 2^(d+1) - 1
    const auto bin = layer_widths({2, 2, 8});
    const auto tern = layer_widths({3, 2, 8});
    for (int d = 0; d <= 8; ++d) {
        CHECK(bin[d] == 1 << d);
        CHECK(tern[d] == (1 << (d + 1)) - 1);
    }
}

TEST_CASE("tree shape validation") {
    CHECK_THROWS_AS(layer_widths({0, 1, 2}), std::invalid_argument);
    CHECK_THROWS_AS(layer_widths({2, 0, 2}), std::invalid_argument);
    CHECK_THROWS_AS(layer_widths({2, 3, 2}), std::invalid_argument);  // stride > window
    CHECK_THROWS_AS(layer_widths({2, 2, -1}), std::invalid_argument);
}

TEST_CASE("tconv_forward hand traces") {
    // disjoint windows
    Matrix b(2, 2);
    b(0, 0) = 0.3;
    b(1, 0) = 0.7;
    b(0, 1) = 0.8;
    b(1, 1) = 0.2;
    const auto out = tconv_forward(b, std::vector<double>{0.5, 0.5}, 2);
    CHECK(out == std::vector<double>{0.15, 0.35, 0.40, 0.10});

    // overlapping windows, one-hot columns
    Matrix c(3, 2);
    c(0, 0) = 1.0;
    c(2, 1) = 1.0;
    const auto out2 = tconv_forward(c, std::vector<double>{0.4, 0.6}, 2);
    CHECK(out2 == std::vector<double>{0.4, 0.0, 0.0, 0.0, 0.6});

    // degenerate chain is the identity
    Matrix ones(1, 4, 1.0);
    const std::vector<double> p{0.1, 0.2, 0.3, 0.4};
    CHECK(tconv_forward(ones, p, 1) == p);
}

TEST_CASE("tconv_forward stochasticity closure") {
    Rng rng(31);
    for (int it = 0; it < 200; ++it) {
        const int window = 1 + static_cast<int>(rng() % 5);
        const int stride = 1 + static_cast<int>(rng() % window);
        const int nodes = 1 + static_cast<int>(rng() % 9);
        const Matrix b = random_stochastic(window, nodes, rng);
        const auto p = random_simplex(nodes, rng);
        const auto q = tconv_forward(b, p, stride);
        double sum = 0.0;
        for (double v : q) {
            CHECK(v >= 0.0);
            sum += v;
        }
        CHECK(std::abs(sum - 1.0) <= 1e-9);
    }
}

TEST_CASE("tconv_backward hand case and zero seed") {
    Matrix b(2, 2);
    b(0, 0) = 0.3;
    b(1, 0) = 0.7;
    b(0, 1) = 0.8;
    b(1, 1) = 0.2;
    const std::vector<double> p{0.5, 0.5};

    const TconvGrads zero =
        tconv_backward(b, p, 2, std::vector<double>{0.0, 0.0, 0.0, 0.0});
    for (double v : zero.p) CHECK(v == 0.0);
    for (double v : zero.b.data()) CHECK(v == 0.0);

    const TconvGrads g =
        tconv_backward(b, p, 2, std::vector<double>{1.0, 0.0, 0.0, 0.0});
    CHECK(g.p == std::vector<double>{0.3, 0.0});
    CHECK(g.b(0, 0) == 0.5);
    CHECK(g.b(1, 0) == 0.0);
    CHECK(g.b(0, 1) == 0.0);
    CHECK(g.b(1, 1) == 0.0);
}

TEST_CASE("tconv_backward matches finite differences") {
    Rng rng(77);
    Matrix b = random_stochastic(3, 4, rng);
    std::vector<double> p = random_simplex(4, rng);
    std::vector<double> seed(2 * 3 + 3);
    for (double& v : seed) v = 2.0 * uniform_draw(rng) - 1.0;

    const TconvGrads g = tconv_backward(b, p, 2, seed);
    auto objective = [&] { return dot(seed, tconv_forward(b, p, 2)); };

    const auto fd_b = central_diff(objective, b.data());
    CHECK(max_rel_err(g.b.data(), fd_b) < 1e-6);
    const auto fd_p = central_diff(objective, std::span<double>(p));
    CHECK(max_rel_err(g.p, fd_p) < 1e-6);
}

TEST_CASE("tconv adjoint identity") {
    // forward is bilinear in (b, p), so each partial gradient is the adjoint
    // of the map with the other argument fixed:
    //   <g, fwd(b, p)> = <grad_b, b> = <grad_p, p>
    Rng rng(99);
    for (int it = 0; it < 50; ++it) {
        const int window = 1 + static_cast<int>(rng() % 4);
        const int stride = 1 + static_cast<int>(rng() % window);
        const int nodes = 1 + static_cast<int>(rng() % 6);
        const Matrix b = random_stochastic(window, nodes, rng);
        const auto p = random_simplex(nodes, rng);
        std::vector<double> seed(static_cast<size_t>(stride) * (nodes - 1) + window);
        for (double& v : seed) v = 2.0 * uniform_draw(rng) - 1.0;

        const double lhs = dot(seed, tconv_forward(b, p, stride));
        const TconvGrads g = tconv_backward(b, p, stride, seed);
        CHECK(std::abs(lhs - dot(g.b.data(), b.data())) <= 1e-12);
        CHECK(std::abs(lhs - dot(g.p, p)) <= 1e-12);
    }
}

TEST_CASE("materialize_transition placement") {
    Matrix b(2, 2);
    b(0, 0) = 0.3;
    b(1, 0) = 0.7;
    b(0, 1) = 0.8;
    b(1, 1) = 0.2;
    const Matrix t = materialize_transition(b, 2);
    REQUIRE(t.rows() == 4);
    REQUIRE(t.cols() == 2);
    CHECK(t(0, 0) == 0.3);
    CHECK(t(1, 0) == 0.7);
    CHECK(t(2, 0) == 0.0);
    CHECK(t(0, 1) == 0.0);
    CHECK(t(2, 1) == 0.8);
    CHECK(t(3, 1) == 0.2);

    // overlapping windows land in distinct columns
    Rng rng(13);
    const Matrix b2 = random_stochastic(3, 2, rng);
    const Matrix t2 = materialize_transition(b2, 2);
    REQUIRE(t2.rows() == 5);
    REQUIRE(t2.cols() == 2);
    for (int w = 0; w < 3; ++w) {
        CHECK(t2(w, 0) == b2(w, 0));
        CHECK(t2(2 + w, 1) == b2(w, 1));
    }
    CHECK(t2(3, 0) == 0.0);
    CHECK(t2(0, 1) == 0.0);
    CHECK(is_column_stochastic(t2));
}

TEST_CASE("materialized product equals tconv exactly") {
    Rng rng(55);
    for (int it = 0; it < 100; ++it) {
        const int window = 1 + static_cast<int>(rng() % 5);
        const int stride = 1 + static_cast<int>(rng() % window);
        const int nodes = 1 + static_cast<int>(rng() % 8);
        const Matrix b = random_stochastic(window, nodes, rng);
        const auto p = random_simplex(nodes, rng);
        const auto direct = tconv_forward(b, p, stride);
        const auto dense = matvec(materialize_transition(b, stride), p);
        REQUIRE(direct.size() == dense.size());
        for (size_t k = 0; k < direct.size(); ++k) CHECK(direct[k] == dense[k]);
    }
}

TEST_CASE("naive_chain basics") {
    CHECK(naive_chain({}, {1.0}) == std::vector<double>{1.0});

    Matrix root(2, 1);
    root(0, 0) = 0.3;
    root(1, 0) = 0.7;
    const Matrix t = materialize_transition(root, 2);
    CHECK(naive_chain({t}, {1.0}) == std::vector<double>{0.3, 0.7});

    Matrix bad(3, 2);
    CHECK_THROWS_AS(naive_chain({bad}, {1.0}), std::invalid_argument);
}

TEST_CASE("oracle equivalence over a shape grid") {
    const std::pair<int, int> grid[] = {{2, 2}, {3, 2}, {3, 3}, {7, 2}};
    Rng rng(2024);
    for (const auto& [window, stride] : grid) {
        for (int depth = 1; depth <= 4; ++depth) {
            const TreeShape shape{window, stride, depth};
            const auto widths = layer_widths(shape);
            std::vector<Matrix> locals;
            std::vector<Matrix> fulls;
            for (int d = 0; d < depth; ++d) {
                locals.push_back(random_stochastic(window, widths[d], rng));
                fulls.push_back(materialize_transition(locals.back(), stride));
            }
            std::vector<double> p{1.0};
            for (const Matrix& b : locals) p = tconv_forward(b, p, stride);
            const auto q = naive_chain(fulls, {1.0});
            REQUIRE(p.size() == q.size());
            for (size_t k = 0; k < p.size(); ++k) {
                CHECK(std::abs(p[k] - q[k]) <= 1e-12);
            }
        }
    }
}

TEST_SUITE_END();
