#pragma once
// Classification metrics. Sequence predictions are flattened to token level
// before scoring.

#include <vector>

namespace cogbridge {

struct ClassScore {
    int label = 0;
    int support = 0;  // gold count
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    bool present = false;  // appears in golds or predictions
};

struct F1Report {
    double macro_f1 = 0.0;
    std::vector<ClassScore> per_class;
};

// Unweighted mean of per-class F1 over classes present in golds or
// predictions; absent classes are excluded. Throws on empty or mismatched
// input.
F1Report score_classification(const std::vector<int>& preds, const std::vector<int>& golds,
                              int n_classes);
double macro_f1(const std::vector<int>& preds, const std::vector<int>& golds, int n_classes);

}  // namespace cogbridge
