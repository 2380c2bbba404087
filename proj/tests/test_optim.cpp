#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <limits>

#include "cogbridge/optim.hpp"
#include "cogbridge/rng.hpp"

using namespace cogbridge;

namespace {

struct OneParam {
    Tensor2 value;
    Tensor2 grad;
    OneParam(int r, int c) : value(r, c), grad(r, c) {}
    std::vector<ParamRef> refs(const std::string& name = "p") {
        return {{name, &value, &grad}};
    }
};

}  // namespace

TEST_CASE("zero gradients leave parameters untouched") {
    OneParam p(2, 3);
    p.value.fill(1.5);
    auto refs = p.refs();
    AdamState st(refs);
    adam_step(refs, st, AdamConfig{});
    for (double v : p.value.data) CHECK(v == 1.5);
}

TEST_CASE("first step follows the bias-corrected Adam formula") {
    OneParam p(1, 1);
    p.value.at(0, 0) = 2.0;
    p.grad.at(0, 0) = 0.25;
    auto refs = p.refs();
    AdamState st(refs);
    AdamConfig cfg;
    cfg.lr = 0.1;
    cfg.clip_norm = 1e9;
    adam_step(refs, st, cfg);
    // mhat = g, vhat = g^2 -> step = -lr * g / (|g| + eps).
    const double expect = 2.0 - 0.1 * 0.25 / (0.25 + 1e-8);
    CHECK(p.value.at(0, 0) == doctest::Approx(expect).epsilon(1e-12));
    CHECK(st.t == 1);
}

TEST_CASE("Adam minimizes a quadratic") {
    OneParam p(1, 1);
    p.value.at(0, 0) = -4.0;
    auto refs = p.refs();
    AdamState st(refs);
    AdamConfig cfg;
    cfg.lr = 0.1;
    for (int i = 0; i < 2000; ++i) {
        p.grad.at(0, 0) = 2.0 * (p.value.at(0, 0) - 3.0);
        adam_step(refs, st, cfg);
    }
    CHECK(std::abs(p.value.at(0, 0) - 3.0) < 0.05);
}

TEST_CASE("clipping equals pre-scaled gradients") {
    OneParam a(1, 4), b(1, 4);
    a.value.fill(1.0);
    b.value.fill(1.0);
    // Global norm 6 with clip 3 halves the gradient.
    for (int j = 0; j < 4; ++j) {
        a.grad.at(0, j) = 3.0;
        b.grad.at(0, j) = 1.5;
    }
    auto ra = a.refs(), rb = b.refs();
    AdamState sa(ra), sb(rb);
    AdamConfig ca;
    ca.clip_norm = 3.0;
    AdamConfig cb;
    cb.clip_norm = 1e18;
    adam_step(ra, sa, ca);
    adam_step(rb, sb, cb);
    for (int j = 0; j < 4; ++j)
        CHECK(a.value.at(0, j) == doctest::Approx(b.value.at(0, j)).epsilon(1e-15));
}

TEST_CASE("global_grad_norm is the l2 norm over all buffers") {
    OneParam p(1, 2), q(1, 1);
    p.grad.at(0, 0) = 3.0;
    p.grad.at(0, 1) = 0.0;
    q.grad.at(0, 0) = 4.0;
    std::vector<ParamRef> refs = {{"p", &p.value, &p.grad}, {"q", &q.value, &q.grad}};
    CHECK(global_grad_norm(refs) == doctest::Approx(5.0).epsilon(1e-15));
}

TEST_CASE("non-finite gradients are rejected by name") {
    OneParam p(1, 2);
    p.grad.at(0, 1) = std::numeric_limits<double>::quiet_NaN();
    auto refs = p.refs("W_att");
    AdamState st(refs);
    CHECK_THROWS_WITH_AS(adam_step(refs, st, AdamConfig{}), doctest::Contains("W_att"),
                         std::runtime_error);
}

TEST_CASE("init_params: bounds, determinism, and per-name streams") {
    OneParam p(8, 12), q(8, 12);
    const double bound = std::sqrt(6.0 / (8 + 12));
    init_params(p.refs("W"), 42);
    init_params(q.refs("W"), 42);
    CHECK(p.value.data == q.value.data);

    double mean = 0.0;
    for (double v : p.value.data) {
        CHECK(std::abs(v) <= bound);
        mean += v;
    }
    mean /= static_cast<double>(p.value.size());
    CHECK(std::abs(mean) < bound / 3.0);

    init_params(q.refs("W"), 43);
    CHECK(p.value.data != q.value.data);

    // Same seed, different name -> a different stream.
    init_params(q.refs("V"), 42);
    CHECK(p.value.data != q.value.data);

    // Grads are reset by initialization.
    p.grad.fill(9.0);
    init_params(p.refs("W"), 42);
    for (double v : p.grad.data) CHECK(v == 0.0);
}
