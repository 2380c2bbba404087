#pragma once
// Synthetic corpora with a planted feature-label correlation: the ground
// truth that makes attribution, masking, and selection claims testable.

#include <cstdint>
#include <functional>
#include <string>

#include "cogbridge/corpus.hpp"
#include "cogbridge/tasks.hpp"

namespace cogbridge {

struct PlantSpec {
    int d = 17;            // 17 plants into the eye signals, 8 into the EEG signals
    int planted = 0;       // feature index j, 0 <= j < d
    double effect = 2.0;   // per-class mean shift of feature j, in noise-std units
    double noise = 1.0;    // signal standard deviation
    int len_lo = 5;        // sentence length range (uniform)
    int len_hi = 15;
    int m = 600;           // sentences
    TaskKind kind = TaskKind::ThreeClass;
    std::uint64_t seed = 0;
};

// Signals are Gaussian noise except feature j of the planted signal type,
// whose mean is shifted by (class - 1) * effect. The planted label is
// carried by a surrogate annotation so it survives the file round-trip:
// three-class -> the tense field; binary -> the subject's POS number;
// sequence -> per-token POS tied to the sign of feature j. All other
// annotations are randomized so every bridging task stays constructible.
Corpus generate(const PlantSpec& spec);

// The task that reproduces the planted labels from a generated corpus.
const char* surrogate_task(TaskKind kind);  // "Tense" / "SubjNum" / "POS"

// Resource files matching the generator's lexicon: the common-word list
// covers the frequent words (so OOV varies), and the connector list holds
// the connectors the generator splices into token streams.
void save_synth_resources(const std::string& common_words_path,
                          const std::string& connectors_path);
Resources synth_resources();

// Fraction of repetitions in which `top_feature` (given a fresh corpus and
// the repetition's seed) names the planted feature.
double recovery_rate(const PlantSpec& spec, int repetitions,
                     const std::function<int(const Corpus&, std::uint64_t)>& top_feature);

}  // namespace cogbridge
