#pragma once
// Label construction for the 12 bridging tasks: scalar linguistic measures
// with equal-frequency three-way binning, POS tag sequences, word-order
// shift pairs, and the tense / grammatical-number semantic labels.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cogbridge/corpus.hpp"

namespace cogbridge {

enum class TaskKind { ThreeClass, Binary, Sequence };

struct TaskSpec {
    std::string name;
    TaskKind kind;
    std::vector<std::string> required;  // annotation fields a record must carry

    static const std::vector<TaskSpec>& all();  // the 12 tasks, fixed order
    static const TaskSpec& by_name(const std::string& name);  // InputError on miss
};

// Equal-frequency tertile binning fitted on training values. Thresholds sit
// at the 1/3 and 2/3 empirical quantiles; ties at a threshold fall to the
// lower bin.
struct Bin3 {
    double t1 = 0.0;
    double t2 = 0.0;
    int assign(double v) const { return v <= t1 ? 0 : (v <= t2 ? 1 : 2); }
};

Bin3 bin3(std::vector<double> values);  // InputError if < 3 distinct values

// Scalar measure for the binned tasks (LD, WordLen, DP, OOV, CNC, SenLen,
// DCC); nullopt = record lacks what the task needs and is skipped.
std::optional<double> raw_value(const TaskSpec& task, const SentenceRecord& record,
                                const Resources& res);

// Case-insensitive longest-match-first count of (possibly multiword)
// discourse connectors in the token sequence.
int count_connectors(const std::vector<std::string>& tokens,
                     const std::vector<std::string>& connectors);

// Annotation override first, then the POS heuristic: will/shall (MD) with a
// later VB -> future; else first VBP/VBZ/VBG -> present; else first VBD/VBN
// -> past; nullopt when no verb evidence exists.
std::optional<std::string> tense_label(const SentenceRecord& record);

// singular (NN/NNP) or plural (NNS/NNPS) of the annotated subject/object
// token; nullopt when unannotated or non-nominal.
std::optional<std::string> number_label(const SentenceRecord& record, bool subject);

// The adjacent-swap position for a sentence's shifted variant: uniform over
// 0..n-2, a pure function of (seed, sentence id).
int bshift_swap_index(const std::string& sentence_id, int n, std::uint64_t seed);

struct TaskItem {
    int record_index = -1;       // into Corpus::records
    int label = -1;              // scalar tasks: index into label_vocab
    std::vector<int> label_seq;  // sequence task: per-token vocab indices
    int bshift_swap = -1;        // >=0 marks a shifted item; rows (i, i+1) swapped
};

struct TaskData {
    TaskSpec spec;
    std::vector<std::string> label_vocab;
    std::vector<TaskItem> items;
    std::vector<int> item_fold;  // fold id per item
    int skipped = 0;             // records dropped for missing annotations
};

// Materializes one task against one CV split: bin thresholds, the POS
// vocabulary, and anything else fitted to data come from training folds
// only; test items are labeled with those frozen artifacts. Throws
// InputError when no record carries the required annotations.
TaskData build_task_fold(const Corpus& corpus, const TaskSpec& spec, const Resources& res,
                         const std::vector<int>& fold_of, int test_fold, std::uint64_t seed);

// JSON-lines round-trip of a materialized dataset (labels as vocab strings).
void save_task_items(const std::string& path, const TaskData& data, SignalType signal,
                     const Corpus& corpus);
TaskData load_task_items(const std::string& path, const Corpus& corpus);

}  // namespace cogbridge
