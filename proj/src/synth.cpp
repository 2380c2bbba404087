#include "cogbridge/synth.hpp"

#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "cogbridge/rng.hpp"

namespace cogbridge {

namespace {

// Varying-length lowercase words; the first 20 double as the common-word
// list so OOV status varies across tokens.
const std::vector<std::string>& lexicon() {
    static const std::vector<std::string> words = [] {
        std::vector<std::string> w;
        for (int i = 0; i < 40; ++i)
            w.push_back(std::string(1 + i % 9, static_cast<char>('a' + i % 26)));
        return w;
    }();
    return words;
}

const std::vector<std::string>& connector_words() {
    static const std::vector<std::string> c = {"because", "however", "moreover"};
    return c;
}

const std::vector<std::string>& tag_pool() {
    static const std::vector<std::string> tags = {"DT", "NN",  "NNS", "VB", "VBD",
                                                  "VBZ", "JJ", "RB",  "IN", "MD"};
    return tags;
}

std::string sentence_id(int i) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "s%05d", i);
    return buf;
}

}  // namespace

const char* surrogate_task(TaskKind kind) {
    switch (kind) {
        case TaskKind::ThreeClass: return "Tense";
        case TaskKind::Binary: return "SubjNum";
        case TaskKind::Sequence: return "POS";
    }
    return "?";
}

Corpus generate(const PlantSpec& spec) {
    if (spec.d != SignalSchema::eye().d() && spec.d != SignalSchema::eeg().d())
        throw InputError("synth: d must be 17 (eye) or 8 (eeg), got " + std::to_string(spec.d));
    if (spec.planted < 0 || spec.planted >= spec.d)
        throw InputError("synth: planted feature " + std::to_string(spec.planted) +
                         " outside 0.." + std::to_string(spec.d - 1));
    if (spec.m < 30) throw InputError("synth: corpus size must be >= 30, got " +
                                      std::to_string(spec.m));
    if (spec.len_lo < 1 || spec.len_hi < spec.len_lo)
        throw InputError("synth: bad sentence length range");
    if (spec.effect < 0.0 || spec.noise <= 0.0)
        throw InputError("synth: effect must be >= 0 and noise > 0");

    const SignalType planted_type =
        spec.d == SignalSchema::eye().d() ? SignalType::Eye : SignalType::Eeg;
    const int n_classes = spec.kind == TaskKind::ThreeClass ? 3 : 2;
    const std::vector<std::string>& lex = lexicon();
    const std::vector<std::string>& conn = connector_words();
    const std::vector<std::string>& tags = tag_pool();
    const std::vector<std::string> tenses = {"present", "past", "future"};

    Corpus corpus;
    corpus.records.reserve(spec.m);
    for (int si = 0; si < spec.m; ++si) {
        Rng rng(mix_seed(spec.seed, {"sent", static_cast<std::uint64_t>(si)}));
        SentenceRecord r;
        r.id = sentence_id(si);
        const int n = spec.len_lo + static_cast<int>(rng.below(
                                        static_cast<std::uint64_t>(spec.len_hi - spec.len_lo + 1)));
        const int cls = static_cast<int>(rng.below(static_cast<std::uint64_t>(n_classes)));

        r.eye = Tensor2(n, SignalSchema::eye().d());
        r.eeg = Tensor2(n, SignalSchema::eeg().d());
        for (Tensor2* S : {&r.eye, &r.eeg})
            for (double& v : S->data) v = rng.gaussian() * spec.noise;
        Tensor2& planted = r.signals(planted_type);
        if (spec.kind != TaskKind::Sequence) {
            const double shift = (cls - 1) * spec.effect;
            for (int t = 0; t < n; ++t) planted.at(t, spec.planted) += shift;
        }

        for (int t = 0; t < n; ++t) {
            const std::uint64_t roll = rng.below(100);
            if (roll < 8)
                r.tokens.push_back(conn[static_cast<std::size_t>(rng.below(conn.size()))]);
            else if (roll < 30)
                r.tokens.push_back(lex[20 + static_cast<std::size_t>(rng.below(20))]);
            else
                r.tokens.push_back(lex[static_cast<std::size_t>(rng.below(20))]);
        }

        if (spec.kind == TaskKind::Sequence) {
            // Per-token planting: the POS tag is the sign of feature j.
            for (int t = 0; t < n; ++t)
                r.pos.push_back(planted.at(t, spec.planted) >= 0.0 ? "NN" : "VB");
            r.tense = tenses[static_cast<std::size_t>(rng.below(3))];
        } else {
            for (int t = 0; t < n; ++t)
                r.pos.push_back(tags[static_cast<std::size_t>(rng.below(tags.size()))]);
            r.subject_index = 0;
            if (spec.kind == TaskKind::Binary) {
                r.pos[0] = cls == 0 ? "NN" : "NNS";
                r.tense = tenses[static_cast<std::size_t>(rng.below(3))];
            } else {
                r.pos[0] = rng.below(2) == 0 ? "NN" : "NNS";
                r.tense = tenses[cls];
            }
            if (n >= 2) {
                r.object_index = 1;
                r.pos[1] = rng.below(2) == 0 ? "NN" : "NNS";
            }
        }

        std::vector<int> senses(n);
        for (int& s : senses) s = static_cast<int>(rng.below(8));
        r.sense_counts = std::move(senses);
        r.complex_nominals = static_cast<int>(rng.below(7));
        r.clauses = 1 + static_cast<int>(rng.below(3));
        corpus.records.push_back(std::move(r));
    }
    return corpus;
}

Resources synth_resources() {
    Resources res;
    for (int i = 0; i < 20; ++i) res.common_words.insert(lexicon()[i]);
    res.connectors = connector_words();
    return res;
}

void save_synth_resources(const std::string& common_words_path,
                          const std::string& connectors_path) {
    std::ofstream cw(common_words_path);
    if (!cw) throw InputError(common_words_path + ": cannot write");
    for (int i = 0; i < 20; ++i) cw << lexicon()[i] << "\n";
    std::ofstream cn(connectors_path);
    if (!cn) throw InputError(connectors_path + ": cannot write");
    for (const std::string& c : connector_words()) cn << c << "\n";
}

double recovery_rate(const PlantSpec& spec, int repetitions,
                     const std::function<int(const Corpus&, std::uint64_t)>& top_feature) {
    if (repetitions < 1) throw std::invalid_argument("recovery_rate: repetitions must be >= 1");
    int hits = 0;
    for (int rep = 0; rep < repetitions; ++rep) {
        PlantSpec s = spec;
        s.seed = mix_seed(spec.seed, {"rep", static_cast<std::uint64_t>(rep)});
        Corpus corpus = generate(s);
        if (top_feature(corpus, s.seed) == spec.planted) ++hits;
    }
    return static_cast<double>(hits) / repetitions;
}

}  // namespace cogbridge
