#pragma once
// Experiment orchestration: k-fold cross-validation with per-fold
// normalization, attention aggregation into per-task importance scores,
// frozen-model signal masking, and the top-k feature-selection comparison.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cogbridge/corpus.hpp"
#include "cogbridge/metrics.hpp"
#include "cogbridge/model.hpp"
#include "cogbridge/selection.hpp"
#include "cogbridge/tasks.hpp"
#include "cogbridge/train.hpp"

namespace cogbridge {

struct ExperimentConfig {
    std::string task;
    SignalType signal = SignalType::Eye;
    int k_folds = 5;
    std::uint64_t seed = 0;
    ModelConfig model;  // signal/task/seed fields are overwritten per fold
    bool masking = false;
    bool mask_retrain = false;  // retrain per masked feature instead of frozen re-eval
    std::vector<std::string> featsel_methods;
    std::vector<int> k_sweep;
    int jobs = 1;  // fold-level parallelism
    TrainConfig train;
};

// Focal loss is the default for the imbalanced semantic labels; everything
// else trains under cross-entropy.
ModelConfig default_model_config(const std::string& task);

struct FoldResult {
    int fold = 0;
    double macro_f1 = 0.0;
    F1Report report;
    std::vector<std::string> label_vocab;  // this fold's labels (POS vocab is fold-specific)
    std::vector<double> mean_alpha;  // d; sums to 1 (empty when attention is off)
    int best_epoch = 0;
    int n_train = 0;
    int n_test = 0;
    bool flagged = false;  // excluded from every average
    std::string flag_reason;
};

struct CvResult {
    ExperimentConfig config;
    TaskKind kind = TaskKind::ThreeClass;
    int d = 0;
    int n_max = 0;
    std::vector<std::string> label_vocab;
    std::vector<int> fold_of;  // record index -> fold id
    std::vector<FoldResult> folds;
    std::vector<double> attention_scores;  // mean test-sentence alpha, sum 1
    double mean_f1 = 0.0;                  // over non-flagged folds

    // Frozen per-fold artifacts for masking: the trained model, the
    // normalization fingerprint of its training split, and its train/test
    // examples (already normalized, padded, and swap-applied).
    std::vector<std::optional<BridgeModel>> models;
    std::vector<std::uint64_t> fingerprints;
    std::vector<std::vector<Example>> train_sets;
    std::vector<std::vector<Example>> test_sets;
};

// Padded, normalized model inputs for every item of a materialized task;
// BShift swap rows are applied here. keep_cols restricts the signal to the
// listed feature columns (empty = all, in schema order).
std::vector<Example> make_examples(const Corpus& normalized, const TaskData& data,
                                   SignalType signal, int n_max,
                                   const std::vector<int>& keep_cols = {});

// Trains one model per fold (normalization fitted on that fold's training
// ids only, asserted by fingerprint) and aggregates attention over all
// test-fold sentences. Folds whose training items miss a label class are
// flagged and excluded from aggregates.
CvResult run_cv(const Corpus& corpus, const Resources& res, const ExperimentConfig& config);

struct MaskReport {
    std::vector<int> order;         // features by descending attention score
    std::vector<double> f1_after;   // mean macro-F1 with that single feature zeroed
    double baseline_f1 = 0.0;       // unmasked mean macro-F1
};

// Zeroes one feature column at a time (in normalized space, zero = training
// mean) across every stored test set and re-evaluates the frozen fold
// models; set config.mask_retrain to retrain per feature instead.
MaskReport mask_eval(const CvResult& cv, const Corpus& corpus);

struct FeatselCell {
    std::string method;
    int k = 0;
    std::string classifier;  // "lr" | "lstm"
    double mean_f1 = 0.0;
    std::vector<int> selected;  // schema indices, selection order
};

struct FeatselGrid {
    std::vector<std::string> methods;
    std::vector<int> k_sweep;
    std::vector<FeatselCell> cells;  // methods x k_sweep x 2 classifiers
};

// Scores every method on the full corpus, then for each method x k trains
// both classifiers under the CV protocol on the top-k feature subset.
// "attention" (and the "attention_bottom" noise control) need the score
// vector of a prior run_cv; pass it via attention_scores.
FeatselGrid featsel_compare(const Corpus& corpus, const Resources& res,
                            const ExperimentConfig& config,
                            const std::vector<double>& attention_scores);

}  // namespace cogbridge
