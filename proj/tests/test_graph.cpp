#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <functional>
#include <vector>

#include "cogbridge/graph.hpp"
#include "cogbridge/rng.hpp"

using namespace cogbridge;

namespace {

Tensor2 random_tensor(int r, int c, std::uint64_t seed, double lo = -2.0, double hi = 2.0) {
    Rng rng(seed);
    Tensor2 t(r, c);
    for (double& v : t.data) v = rng.uniform(lo, hi);
    return t;
}

std::vector<std::pair<int, int>> all_picks(int r, int c) {
    std::vector<std::pair<int, int>> p;
    for (int i = 0; i < r; ++i)
        for (int j = 0; j < c; ++j) p.emplace_back(i, j);
    return p;
}

// Weighted sum of every output entry gives a scalar loss with nonuniform
// output gradients, exercising the full backward of the op under test.
Graph::NodeId weighted_sum(Graph& g, Graph::NodeId out, const Tensor2& shape_like,
                           std::uint64_t seed) {
    Graph::NodeId w = g.input(random_tensor(shape_like.rows, shape_like.cols, seed, 0.1, 1.5));
    Graph::NodeId prod = g.mul(out, w);
    return g.gather_sum(prod, all_picks(shape_like.rows, shape_like.cols));
}

// Central finite differences on every entry of every bound parameter.
// build() wires a fresh-values graph over the given parameter tensors and
// returns the scalar loss node.
void check_gradients(std::vector<Tensor2*> params,
                     const std::function<Graph::NodeId(Graph&, std::vector<Graph::NodeId>&)>& build,
                     double h = 1e-5, double tol = 1e-4) {
    Graph g;
    std::vector<Graph::NodeId> pids;
    for (Tensor2* p : params) {
        p->requires_grad = true;
        pids.push_back(g.param(*p));
    }
    Graph::NodeId loss = build(g, pids);
    g.forward();
    g.backward(loss);
    REQUIRE(g.value(loss).rows == 1);
    REQUIRE(g.value(loss).cols == 1);

    for (std::size_t k = 0; k < params.size(); ++k) {
        Tensor2& p = *params[k];
        const Tensor2& grad = g.grad(pids[k]);
        REQUIRE(grad.rows == p.rows);
        REQUIRE(grad.cols == p.cols);
        for (std::size_t i = 0; i < p.data.size(); ++i) {
            const double keep = p.data[i];
            p.data[i] = keep + h;
            g.forward();
            const double up = g.value(loss).at(0, 0);
            p.data[i] = keep - h;
            g.forward();
            const double dn = g.value(loss).at(0, 0);
            p.data[i] = keep;
            const double fd = (up - dn) / (2.0 * h);
            const double ad = grad.data[i];
            const double err = std::abs(fd - ad) / std::max(1.0, std::abs(fd));
            INFO("param ", k, " entry ", i, " fd=", fd, " ad=", ad);
            CHECK(err < tol);
        }
    }
}

}  // namespace

TEST_CASE("finite differences: matmul") {
    Tensor2 A = random_tensor(3, 4, 11), B = random_tensor(4, 2, 12);
    check_gradients({&A, &B}, [&](Graph& g, std::vector<Graph::NodeId>& p) {
        Graph::NodeId out = g.matmul(p[0], p[1]);
        return weighted_sum(g, out, Tensor2(3, 2), 13);
    });
}

TEST_CASE("finite differences: add / add_colvec / add_rowvec") {
    Tensor2 A = random_tensor(3, 4, 21), B = random_tensor(3, 4, 22);
    Tensor2 cv = random_tensor(3, 1, 23), rv = random_tensor(1, 4, 24);
    check_gradients({&A, &B, &cv, &rv}, [&](Graph& g, std::vector<Graph::NodeId>& p) {
        Graph::NodeId out = g.add_rowvec(g.add_colvec(g.add(p[0], p[1]), p[2]), p[3]);
        return weighted_sum(g, out, Tensor2(3, 4), 25);
    });
}

TEST_CASE("finite differences: mul / mul_rowvec / scale") {
    Tensor2 A = random_tensor(2, 5, 31), B = random_tensor(2, 5, 32);
    Tensor2 rv = random_tensor(1, 5, 33);
    check_gradients({&A, &B, &rv}, [&](Graph& g, std::vector<Graph::NodeId>& p) {
        Graph::NodeId out = g.scale(g.mul_rowvec(g.mul(p[0], p[1]), p[2]), -1.7);
        return weighted_sum(g, out, Tensor2(2, 5), 34);
    });
}

TEST_CASE("finite differences: tanh / sigmoid") {
    Tensor2 A = random_tensor(3, 3, 41);
    check_gradients({&A}, [&](Graph& g, std::vector<Graph::NodeId>& p) {
        Graph::NodeId out = g.sigmoid(g.tanh(p[0]));
        return weighted_sum(g, out, Tensor2(3, 3), 42);
    });
}

TEST_CASE("finite differences: softmax_rows") {
    Tensor2 A = random_tensor(4, 5, 51);
    check_gradients({&A}, [&](Graph& g, std::vector<Graph::NodeId>& p) {
        Graph::NodeId out = g.softmax_rows(p[0]);
        return weighted_sum(g, out, Tensor2(4, 5), 52);
    });
}

TEST_CASE("finite differences: logsumexp_rows") {
    Tensor2 A = random_tensor(4, 3, 61);
    check_gradients({&A}, [&](Graph& g, std::vector<Graph::NodeId>& p) {
        Graph::NodeId out = g.logsumexp_rows(p[0]);
        return weighted_sum(g, out, Tensor2(1, 3), 62);
    });
}

TEST_CASE("finite differences: max_over_rows") {
    Tensor2 A = random_tensor(4, 3, 71);
    check_gradients({&A}, [&](Graph& g, std::vector<Graph::NodeId>& p) {
        Graph::NodeId out = g.max_over_rows(p[0]);
        return weighted_sum(g, out, Tensor2(1, 3), 72);
    });
}

TEST_CASE("finite differences: transpose / concat_cols / slices") {
    Tensor2 A = random_tensor(3, 4, 81), B = random_tensor(3, 2, 82);
    check_gradients({&A, &B}, [&](Graph& g, std::vector<Graph::NodeId>& p) {
        Graph::NodeId cat = g.concat_cols(p[0], p[1]);              // 3 x 6
        Graph::NodeId sr = g.slice_rows(cat, 1, 3);                 // 2 x 6
        Graph::NodeId sc = g.slice_cols(sr, 2, 6);                  // 2 x 4
        Graph::NodeId tr = g.transpose(sc);                         // 4 x 2
        return weighted_sum(g, tr, Tensor2(4, 2), 83);
    });
}

TEST_CASE("finite differences: stack_rows / gather_sum") {
    Tensor2 A = random_tensor(1, 4, 91), B = random_tensor(1, 4, 92), C = random_tensor(1, 4, 93);
    check_gradients({&A, &B, &C}, [&](Graph& g, std::vector<Graph::NodeId>& p) {
        Graph::NodeId st = g.stack_rows({p[0], p[1], p[2]});  // 3 x 4
        return g.gather_sum(st, {{0, 1}, {1, 3}, {2, 0}, {2, 0}});
    });
}

TEST_CASE("finite differences: focal_nll against softmax probabilities") {
    for (double gamma : {0.0, 0.5, 2.0}) {
        Tensor2 A = random_tensor(1, 5, 101 + static_cast<int>(gamma * 10));
        check_gradients({&A}, [&](Graph& g, std::vector<Graph::NodeId>& p) {
            Graph::NodeId probs = g.softmax_rows(p[0]);
            return g.focal_nll(probs, 2, gamma, 1.3);
        });
    }
}

TEST_CASE("shared subexpressions accumulate the same gradient as an unrolled form") {
    Tensor2 A1 = random_tensor(3, 3, 111);
    Tensor2 A2 = A1;

    Graph g1;
    A1.requires_grad = true;
    Graph::NodeId p1 = g1.param(A1);
    Graph::NodeId t = g1.tanh(p1);
    Graph::NodeId loss1 = g1.gather_sum(g1.add(t, t), all_picks(3, 3));
    g1.forward();
    g1.backward(loss1);

    Graph g2;
    A2.requires_grad = true;
    Graph::NodeId p2 = g2.param(A2);
    Graph::NodeId loss2 = g2.gather_sum(g2.scale(g2.tanh(p2), 2.0), all_picks(3, 3));
    g2.forward();
    g2.backward(loss2);

    CHECK(g1.value(loss1).at(0, 0) == doctest::Approx(g2.value(loss2).at(0, 0)).epsilon(1e-15));
    for (std::size_t i = 0; i < 9; ++i)
        CHECK(g1.grad(p1).data[i] == doctest::Approx(g2.grad(p2).data[i]).epsilon(1e-14));
}

TEST_CASE("softmax rows sum to one and stay in (0,1)") {
    Rng rng(7);
    for (int rep = 0; rep < 50; ++rep) {
        Graph g;
        Graph::NodeId x = g.input(random_tensor(3, 6, 1000 + rep, -30.0, 30.0));
        Graph::NodeId s = g.softmax_rows(x);
        g.forward();
        const Tensor2& v = g.value(s);
        for (int i = 0; i < 3; ++i) {
            double total = 0.0;
            for (int j = 0; j < 6; ++j) {
                total += v.at(i, j);
                CHECK(v.at(i, j) > 0.0);
                CHECK(v.at(i, j) < 1.0);
            }
            CHECK(std::abs(total - 1.0) <= 1e-12);
        }
    }
}

TEST_CASE("logsumexp shift identity") {
    Tensor2 X = random_tensor(5, 3, 121);
    Tensor2 Xc = X;
    const double c = 13.25;
    for (double& v : Xc.data) v += c;

    Graph g;
    Graph::NodeId a = g.logsumexp_rows(g.input(X));
    Graph::NodeId b = g.logsumexp_rows(g.input(Xc));
    g.forward();
    for (int j = 0; j < 3; ++j)
        CHECK(g.value(b).at(0, j) == doctest::Approx(g.value(a).at(0, j) + c).epsilon(1e-12));
}

TEST_CASE("max_over_rows ties route the gradient to the lowest row") {
    Tensor2 X = Tensor2::from(3, 2, {5.0, 1.0, 5.0, 2.0, 3.0, 2.0});
    X.requires_grad = true;
    Graph g;
    Graph::NodeId p = g.param(X);
    Graph::NodeId mx = g.max_over_rows(p);
    Graph::NodeId loss = g.gather_sum(mx, {{0, 0}, {0, 1}});
    g.forward();
    CHECK(g.value(mx).at(0, 0) == 5.0);
    CHECK(g.value(mx).at(0, 1) == 2.0);
    g.backward(loss);
    // Column 0 ties between rows 0 and 1 -> row 0 takes it; column 1 ties
    // between rows 1 and 2 -> row 1.
    CHECK(g.grad(p).at(0, 0) == 1.0);
    CHECK(g.grad(p).at(1, 0) == 0.0);
    CHECK(g.grad(p).at(1, 1) == 1.0);
    CHECK(g.grad(p).at(2, 1) == 0.0);
}

TEST_CASE("construction-time shape errors name the offending op") {
    Graph g;
    Graph::NodeId a = g.input(Tensor2(2, 3));
    Graph::NodeId b = g.input(Tensor2(2, 3));
    CHECK_THROWS_WITH_AS(g.matmul(a, b), doctest::Contains("matmul"), std::invalid_argument);
    CHECK_THROWS_AS(g.add(a, g.input(Tensor2(3, 2))), std::invalid_argument);
    CHECK_THROWS_AS(g.add_colvec(a, g.input(Tensor2(2, 2))), std::invalid_argument);
    CHECK_THROWS_AS(g.add_rowvec(a, g.input(Tensor2(1, 2))), std::invalid_argument);
    CHECK_THROWS_AS(g.stack_rows({a, b}), std::invalid_argument);
    CHECK_THROWS_AS(g.stack_rows({}), std::invalid_argument);
    CHECK_THROWS_AS(g.slice_rows(a, 1, 4), std::invalid_argument);
    CHECK_THROWS_AS(g.slice_cols(a, 2, 2), std::invalid_argument);
    CHECK_THROWS_AS(g.gather_sum(a, {{2, 0}}), std::invalid_argument);
    CHECK_THROWS_AS(g.gather_sum(a, {}), std::invalid_argument);
    Graph::NodeId probs = g.input(Tensor2(1, 3, 0.3));
    CHECK_THROWS_AS(g.focal_nll(probs, 3, 2.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(g.focal_nll(probs, 0, -1.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(g.focal_nll(a, 0, 2.0, 1.0), std::invalid_argument);
}

TEST_CASE("backward before forward is rejected") {
    Graph g;
    Tensor2 A = random_tensor(1, 1, 131);
    A.requires_grad = true;
    Graph::NodeId p = g.param(A);
    Graph::NodeId loss = g.gather_sum(p, {{0, 0}});
    CHECK_THROWS_AS(g.backward(loss), std::logic_error);
}

TEST_CASE("non-finite values are caught in forward and named") {
    Graph g;
    Tensor2 big(1, 2);
    big.at(0, 0) = 1e308;
    big.at(0, 1) = 1e308;
    Graph::NodeId a = g.input(big);
    g.add(a, a);  // overflows to inf
    CHECK_THROWS_WITH_AS(g.forward(), doctest::Contains("non-finite"), std::runtime_error);
}

TEST_CASE("forward recomputes bound leaves in place") {
    Tensor2 A = Tensor2::from(1, 2, {1.0, 2.0});
    A.requires_grad = true;
    Graph g;
    Graph::NodeId p = g.param(A);
    Graph::NodeId loss = g.gather_sum(g.tanh(p), {{0, 0}, {0, 1}});
    g.forward();
    const double first = g.value(loss).at(0, 0);
    A.at(0, 0) = -1.0;
    A.at(0, 1) = -2.0;
    g.forward();
    CHECK(g.value(loss).at(0, 0) == doctest::Approx(-first).epsilon(1e-15));
}
