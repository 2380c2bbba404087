#pragma once
// Corpus representation and ingestion: sentence records carrying word-level
// eye-tracking (17-dim) and EEG (8-dim) signal rows plus linguistic
// annotations, z-score normalization fitted on an explicit sentence-id split,
// zero-padding to the corpus-wide maximum length, and fold assignment.

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_set>
#include <vector>

#include "cogbridge/tensor.hpp"

namespace cogbridge {

enum class SignalType { Eye, Eeg };

const char* signal_type_name(SignalType t);          // "eye" / "eeg"
SignalType parse_signal_type(const std::string& s);  // InputError on anything else

struct SignalSchema {
    SignalType type;
    std::vector<std::string> feature_names;

    int d() const { return static_cast<int>(feature_names.size()); }

    static const SignalSchema& eye();  // 17 features
    static const SignalSchema& eeg();  // 8 band powers
    static const SignalSchema& of(SignalType t);
};

struct SentenceRecord {
    std::string id;
    std::vector<std::string> tokens;
    Tensor2 eye;  // n x 17
    Tensor2 eeg;  // n x 8
    std::vector<std::string> pos;
    std::optional<std::vector<int>> sense_counts;
    std::optional<int> complex_nominals;
    std::optional<int> clauses;
    std::optional<int> subject_index;
    std::optional<int> object_index;
    std::optional<std::string> tense;  // "present" | "past" | "future"

    int n() const { return static_cast<int>(tokens.size()); }
    const Tensor2& signals(SignalType t) const { return t == SignalType::Eye ? eye : eeg; }
    Tensor2& signals(SignalType t) { return t == SignalType::Eye ? eye : eeg; }
};

// Per-feature z-scoring statistics, tagged with a fingerprint of the sentence
// ids they were fitted on so downstream stages can assert that no test-fold
// statistic ever reached training.
struct NormStats {
    SignalType type = SignalType::Eye;
    std::vector<double> mean;
    std::vector<double> stdev;          // clamped to 1 for constant columns
    std::vector<bool> constant;         // raw column had a single value
    std::uint64_t fit_fingerprint = 0;  // fingerprint of the sorted fit ids

    int d() const { return static_cast<int>(mean.size()); }
};

struct Corpus {
    std::vector<SentenceRecord> records;
    std::optional<NormStats> eye_stats;  // set once normalize() has run
    std::optional<NormStats> eeg_stats;

    int size() const { return static_cast<int>(records.size()); }
    int n_max() const;
    const NormStats& stats(SignalType t) const;
};

// One sentence's model input: rows 0..n-1 are the (normalized) token signal
// rows, rows n..N_max-1 are exactly zero.
struct SignalMatrix {
    Tensor2 H;  // N_max x d
    int n = 0;
    SignalType type = SignalType::Eye;
};

// FNV-1a over the '\n'-joined sorted ids; the normalization fingerprint.
std::uint64_t fingerprint_ids(std::vector<std::string> ids);

// Shortest representation that round-trips the exact double; every file
// this project writes formats reals through here so reruns are byte-equal.
std::string real_to_string(double v);

// Reads the tab-separated signals file and the JSON-lines annotations file,
// cross-checking token counts per sentence id. Throws InputError with
// file/line context on any malformed or inconsistent content.
Corpus load_corpus(const std::string& signals_path, const std::string& annotations_path);

// Writes both ingestion-format files; numbers in shortest round-trip form,
// so save -> load is lossless and byte-deterministic.
void save_corpus(const Corpus& corpus, const std::string& signals_path,
                 const std::string& annotations_path);

NormStats fit_normalization(const Corpus& corpus, SignalType type,
                            const std::vector<std::string>& fit_ids);

// Applies stats to every record of both signal types (tokens only; padding
// is added later and stays zero). Stats travel with the returned corpus.
Corpus apply_normalization(const Corpus& corpus, const NormStats& eye, const NormStats& eeg);

// fit_normalization + apply_normalization for both signal types.
Corpus normalize(const Corpus& corpus, const std::vector<std::string>& fit_ids);

SignalMatrix pad(const SentenceRecord& record, int n_max, SignalType type);

// Deterministic shuffle then near-equal contiguous blocks; returns the fold
// id (0..k-1) of each record, in record order.
std::vector<int> make_folds(const Corpus& corpus, int k, std::uint64_t seed);

struct Resources {
    std::unordered_set<std::string> common_words;  // lowercase
    std::vector<std::string> connectors;           // may be multiword
};

std::vector<std::string> read_lines(const std::string& path);
Resources load_resources(const std::string& common_words_path, const std::string& connectors_path);

}  // namespace cogbridge
