#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <map>
#include <vector>

#include "cogbridge/metrics.hpp"
#include "cogbridge/rng.hpp"

using namespace cogbridge;

namespace {

// Independent confusion-matrix recount used as the oracle.
double oracle_macro_f1(const std::vector<int>& preds, const std::vector<int>& golds, int k) {
    double total = 0.0;
    int counted = 0;
    for (int c = 0; c < k; ++c) {
        int tp = 0, fp = 0, fn = 0;
        for (std::size_t i = 0; i < preds.size(); ++i) {
            if (preds[i] == c && golds[i] == c) ++tp;
            if (preds[i] == c && golds[i] != c) ++fp;
            if (preds[i] != c && golds[i] == c) ++fn;
        }
        if (tp + fp + fn == 0) continue;  // absent everywhere
        const double p = tp + fp > 0 ? static_cast<double>(tp) / (tp + fp) : 0.0;
        const double r = tp + fn > 0 ? static_cast<double>(tp) / (tp + fn) : 0.0;
        total += p + r > 0 ? 2.0 * p * r / (p + r) : 0.0;
        ++counted;
    }
    return counted > 0 ? total / counted : 0.0;
}

}  // namespace

TEST_CASE("perfect predictions score 1") {
    CHECK(macro_f1({0, 1, 2, 1}, {0, 1, 2, 1}, 3) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("one-class predictions on a balanced 3-class set score 1/6") {
    std::vector<int> golds = {0, 0, 1, 1, 2, 2};
    std::vector<int> preds(6, 0);
    // Class 0: P = 1/3, R = 1 -> F1 = 0.5; classes 1 and 2: F1 = 0.
    CHECK(macro_f1(preds, golds, 3) == doctest::Approx(1.0 / 6.0).epsilon(1e-12));
}

TEST_CASE("random fixtures match the independent recount") {
    Rng rng(5);
    for (int rep = 0; rep < 200; ++rep) {
        const int k = 2 + static_cast<int>(rng.below(5));
        const int n = 1 + static_cast<int>(rng.below(40));
        std::vector<int> preds(static_cast<std::size_t>(n)), golds(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) {
            preds[static_cast<std::size_t>(i)] = static_cast<int>(rng.below(k));
            golds[static_cast<std::size_t>(i)] = static_cast<int>(rng.below(k));
        }
        CHECK(macro_f1(preds, golds, k) ==
              doctest::Approx(oracle_macro_f1(preds, golds, k)).epsilon(1e-12));
    }
}

TEST_CASE("per-class report carries supports and presence") {
    F1Report rep = score_classification({0, 0, 1}, {0, 1, 1}, 3);
    REQUIRE(rep.per_class.size() == 3);
    CHECK(rep.per_class[0].support == 1);
    CHECK(rep.per_class[1].support == 2);
    CHECK(rep.per_class[2].support == 0);
    CHECK(rep.per_class[0].present);
    CHECK(rep.per_class[1].present);
    CHECK_FALSE(rep.per_class[2].present);
    CHECK(rep.per_class[0].precision == doctest::Approx(0.5));
    CHECK(rep.per_class[0].recall == doctest::Approx(1.0));
}

TEST_CASE("degenerate inputs are rejected") {
    CHECK_THROWS_AS(macro_f1({}, {}, 3), std::invalid_argument);
    CHECK_THROWS_AS(macro_f1({0, 1}, {0}, 3), std::invalid_argument);
    CHECK_THROWS_AS(macro_f1({0, 3}, {0, 1}, 3), std::invalid_argument);
}
