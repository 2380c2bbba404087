#include "cogbridge/metrics.hpp"

#include <stdexcept>
#include <string>

namespace cogbridge {

F1Report score_classification(const std::vector<int>& preds, const std::vector<int>& golds,
                              int n_classes) {
    if (preds.empty()) throw std::invalid_argument("score_classification: empty input");
    if (preds.size() != golds.size())
        throw std::invalid_argument("score_classification: " + std::to_string(preds.size()) +
                                    " predictions vs " + std::to_string(golds.size()) + " golds");

    std::vector<int> tp(n_classes, 0), fp(n_classes, 0), fn(n_classes, 0), support(n_classes, 0);
    for (std::size_t i = 0; i < preds.size(); ++i) {
        const int p = preds[i], g = golds[i];
        if (p < 0 || p >= n_classes || g < 0 || g >= n_classes)
            throw std::invalid_argument("score_classification: label outside 0.." +
                                        std::to_string(n_classes - 1));
        ++support[g];
        if (p == g) {
            ++tp[p];
        } else {
            ++fp[p];
            ++fn[g];
        }
    }

    F1Report rep;
    rep.per_class.resize(n_classes);
    double total = 0.0;
    int counted = 0;
    for (int c = 0; c < n_classes; ++c) {
        ClassScore& s = rep.per_class[c];
        s.label = c;
        s.support = support[c];
        s.present = (tp[c] + fp[c] + fn[c]) > 0;
        if (!s.present) continue;
        const int denom_p = tp[c] + fp[c];
        const int denom_r = tp[c] + fn[c];
        s.precision = denom_p ? static_cast<double>(tp[c]) / denom_p : 0.0;
        s.recall = denom_r ? static_cast<double>(tp[c]) / denom_r : 0.0;
        s.f1 = (s.precision + s.recall) > 0.0
                   ? 2.0 * s.precision * s.recall / (s.precision + s.recall)
                   : 0.0;
        total += s.f1;
        ++counted;
    }
    rep.macro_f1 = counted ? total / counted : 0.0;
    return rep;
}

double macro_f1(const std::vector<int>& preds, const std::vector<int>& golds, int n_classes) {
    return score_classification(preds, golds, n_classes).macro_f1;
}

}  // namespace cogbridge
