#pragma once
// Report rendering: the per-feature x per-task attention grids, fold
// metrics, mask curves, feature-selection grids, and the JSON run manifest.
// Every real number goes through the shortest-round-trip formatter, so a
// rerun with identical inputs reproduces every file byte for byte;
// timestamps live only in the manifest.

#include <cstdint>
#include <string>
#include <vector>

#include "cogbridge/harness.hpp"

namespace cogbridge {

// One attention grid per signal type: rows = schema features, one column
// per task (empty until that task has been run). Saving merges by rewrite:
// load, set this run's column, save.
struct AttentionGrid {
    SignalType signal = SignalType::Eye;
    std::vector<std::string> features;             // schema order
    std::vector<std::string> tasks;                // the 12 task names
    std::vector<std::vector<double>> columns;      // per task; empty = not run yet
};

AttentionGrid empty_attention_grid(SignalType signal);
// Missing file -> empty grid; malformed file -> InputError.
AttentionGrid load_attention_grid(const std::string& path, SignalType signal);
void set_grid_column(AttentionGrid& grid, const std::string& task,
                     const std::vector<double>& scores);
void save_attention_grid(const AttentionGrid& grid, const std::string& path);

void write_fold_metrics(const std::string& path, const CvResult& cv);
void write_per_class(const std::string& path, const CvResult& cv);
void write_mask_curve(const std::string& path, const MaskReport& report, SignalType signal);
// Long form: method,k,classifier,mean_f1,selected.
void write_featsel_grid(const std::string& path, const FeatselGrid& grid);
// Plot-ready pivot: one row per k, one column per method x classifier.
void write_featsel_series(const std::string& path, const FeatselGrid& grid);

std::uint64_t fnv1a_bytes(const std::string& bytes);
std::uint64_t fnv1a_file(const std::string& path);  // InputError when unreadable
std::string hex64(std::uint64_t v);

// Writes via a temporary file plus rename so readers never see a torn
// manifest.
void write_atomic(const std::string& path, const std::string& content);

std::string iso8601_now();

}  // namespace cogbridge
