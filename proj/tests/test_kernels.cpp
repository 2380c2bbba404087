#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <vector>

#include "cogbridge/kernels.hpp"
#include "cogbridge/rng.hpp"

using namespace cogbridge;
namespace kn = cogbridge::kernels;

namespace {

std::vector<double> random_vec(std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<double> v(n);
    for (double& x : v) x = rng.uniform(-2.0, 2.0);
    return v;
}

const std::vector<std::size_t> kSizes = {0, 1, 2, 3, 4, 5, 7, 8, 9, 15, 16, 31, 64, 257, 1000};

}  // namespace

TEST_CASE("scalar dot matches a hand-computed value") {
    const double x[] = {1.0, 2.0, 3.0};
    const double y[] = {4.0, -5.0, 6.0};
    CHECK(kn::scalar::dot(x, y, 3) == doctest::Approx(4.0 - 10.0 + 18.0).epsilon(1e-15));
    CHECK(kn::scalar::sum(x, 3) == doctest::Approx(6.0).epsilon(1e-15));
}

TEST_CASE("avx2 kernels match scalar kernels") {
    if (!kn::cpu_has_avx2()) {
        MESSAGE("no AVX2 on this CPU; skipping");
        return;
    }
    for (std::size_t n : kSizes) {
        std::vector<double> a = random_vec(n, 100 + n);
        std::vector<double> b = random_vec(n, 200 + n);

        // Reductions may reassociate; allow tiny relative slack.
        const double ds = kn::scalar::dot(a.data(), b.data(), n);
        const double dv = kn::avx2::dot(a.data(), b.data(), n);
        CHECK(std::abs(ds - dv) <= 1e-12 * (1.0 + std::abs(ds)));
        const double ss = kn::scalar::sum(a.data(), n);
        const double sv = kn::avx2::sum(a.data(), n);
        CHECK(std::abs(ss - sv) <= 1e-12 * (1.0 + std::abs(ss)));

        // Elementwise ops must agree exactly.
        std::vector<double> o1(n), o2(n);
        kn::scalar::add(a.data(), b.data(), o1.data(), n);
        kn::avx2::add(a.data(), b.data(), o2.data(), n);
        CHECK(o1 == o2);
        kn::scalar::mul(a.data(), b.data(), o1.data(), n);
        kn::avx2::mul(a.data(), b.data(), o2.data(), n);
        CHECK(o1 == o2);
        kn::scalar::scale(a.data(), 1.7, o1.data(), n);
        kn::avx2::scale(a.data(), 1.7, o2.data(), n);
        CHECK(o1 == o2);

        std::vector<double> y1 = b, y2 = b;
        kn::scalar::axpy(-0.3, a.data(), y1.data(), n);
        kn::avx2::axpy(-0.3, a.data(), y2.data(), n);
        CHECK(y1 == y2);
    }
}

TEST_CASE("force_isa steers the dispatched entry points") {
    const kn::Isa before = kn::active_isa();
    std::vector<double> a = random_vec(37, 1);
    std::vector<double> b = random_vec(37, 2);

    kn::force_isa(kn::Isa::Scalar);
    CHECK(kn::active_isa() == kn::Isa::Scalar);
    CHECK(kn::dot(a.data(), b.data(), a.size()) == kn::scalar::dot(a.data(), b.data(), a.size()));

    if (kn::cpu_has_avx2()) {
        kn::force_isa(kn::Isa::Avx2);
        CHECK(kn::active_isa() == kn::Isa::Avx2);
        CHECK(kn::dot(a.data(), b.data(), a.size()) ==
              kn::avx2::dot(a.data(), b.data(), a.size()));
    } else {
        CHECK_THROWS(kn::force_isa(kn::Isa::Avx2));
    }
    kn::force_isa(before);
}
