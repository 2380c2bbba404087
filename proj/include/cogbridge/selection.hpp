#pragma once
// Feature-selection baselines operating on sentence-level aggregated
// vectors: plug-in mutual information over equal-frequency bins, recursive
// feature elimination driven by multinomial logistic regression, and a
// from-scratch random forest with Gini importance.

#include <cstdint>
#include <string>
#include <vector>

#include "cogbridge/corpus.hpp"
#include "cogbridge/tasks.hpp"

namespace cogbridge {

struct AggregatedDataset {
    Tensor2 X;  // m x d: per-sentence reduction of each signal feature
    std::vector<int> y;
    std::vector<int> item_fold;  // carried through for CV classifier runs
    std::vector<std::string> feature_names;

    int m() const { return X.rows; }
    int d() const { return X.cols; }
    int n_classes = 0;
};

// Mean (default) or max over the true-length token rows of each item's
// signal matrix. Sequence tasks have no single label and are rejected.
AggregatedDataset aggregate(const Corpus& corpus, const TaskData& data, SignalType signal,
                            bool use_max = false);

// Plug-in MI(feature; label) in nats after equal-frequency discretization
// (ties to the lower bin); scores normalized to sum 1 when any is positive.
std::vector<double> mutual_information(const AggregatedDataset& data, int bins = 10);

// Multinomial logistic regression fitted by full-batch gradient descent
// with backtracking step halving; features are z-scored internally.
struct LrModel {
    Tensor2 W;                 // d x C
    Tensor2 b;                 // 1 x C
    std::vector<double> mean;  // training z-score stats
    std::vector<double> stdev;
    bool converged = true;
    int iterations = 0;
};

LrModel fit_logreg(const Tensor2& X, const std::vector<int>& y, int n_classes,
                   double lambda = 1e-3, int max_iters = 500);
int predict_logreg(const LrModel& m, const double* x_row, int d);  // ties to lowest class

// Recursive elimination, one feature per round, dropping the smallest
// L2-norm coefficient column; rank 1 = survivor, rank d = first eliminated.
std::vector<int> rfe_rank(const AggregatedDataset& data);

// CART forest: Gini splits, bootstrap per tree, ceil(sqrt(d)) candidate
// features per split, min-leaf 2; importance = sample-weighted Gini
// decrease per feature, averaged over trees, normalized to sum 1.
std::vector<double> rf_importance(const AggregatedDataset& data, int trees, std::uint64_t seed);

// Indices of the k highest scores (descending; ties -> earlier schema index).
std::vector<int> top_k(const std::vector<double>& scores, int k);
// Indices of the k best (lowest) ranks.
std::vector<int> top_k_ranks(const std::vector<int>& ranks, int k);
// Indices of the k lowest scores (ascending; ties -> earlier schema index);
// the noise-control selector used by the comparison harness.
std::vector<int> bottom_k(const std::vector<double>& scores, int k);

}  // namespace cogbridge
