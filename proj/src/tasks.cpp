#include "cogbridge/tasks.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <set>
#include <stdexcept>
#include <unordered_map>

#include "cogbridge/rng.hpp"
#include "json.hpp"

namespace cogbridge {

namespace {

using nlohmann::json;

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

bool pos_is_content(const std::string& tag) {
    for (const char* prefix : {"NN", "VB", "JJ", "RB"})
        if (tag.rfind(prefix, 0) == 0) return true;
    return false;
}

std::vector<std::string> split_words(const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == ' ') {
            if (!cur.empty()) out.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    if (!cur.empty()) out.push_back(cur);
    return out;
}

std::string join(const std::vector<std::string>& parts, const std::string& sep) {
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i) out += sep;
        out += parts[i];
    }
    return out;
}

const std::vector<std::string> kBinVocab = {"low", "mid", "high"};
const std::vector<std::string> kBShiftVocab = {"original", "shifted"};
const std::vector<std::string> kNumberVocab = {"singular", "plural"};
const std::vector<std::string> kTenseVocab = {"present", "past", "future"};

}  // namespace

const std::vector<TaskSpec>& TaskSpec::all() {
    static const std::vector<TaskSpec> specs = {
        {"LD", TaskKind::ThreeClass, {"pos"}},
        {"WordLen", TaskKind::ThreeClass, {}},
        {"DP", TaskKind::ThreeClass, {"sense_counts"}},
        {"OOV", TaskKind::ThreeClass, {}},
        {"CNC", TaskKind::ThreeClass, {"complex_nominals", "clauses"}},
        {"SenLen", TaskKind::ThreeClass, {}},
        {"POS", TaskKind::Sequence, {"pos"}},
        {"BShift", TaskKind::Binary, {}},
        {"Tense", TaskKind::ThreeClass, {"tense (or pos verb evidence)"}},
        {"SubjNum", TaskKind::Binary, {"subject_index", "pos"}},
        {"ObjNum", TaskKind::Binary, {"object_index", "pos"}},
        {"DCC", TaskKind::ThreeClass, {}},
    };
    return specs;
}

const TaskSpec& TaskSpec::by_name(const std::string& name) {
    for (const TaskSpec& t : all())
        if (t.name == name) return t;
    std::vector<std::string> names;
    for (const TaskSpec& t : all()) names.push_back(t.name);
    throw InputError("unknown task '" + name + "' (want one of " + join(names, ", ") + ")");
}

Bin3 bin3(std::vector<double> values) {
    if (values.size() < 3) throw InputError("bin3: need at least 3 values, got " +
                                            std::to_string(values.size()));
    std::sort(values.begin(), values.end());
    std::size_t distinct = 1;
    for (std::size_t i = 1; i < values.size(); ++i)
        if (values[i] != values[i - 1]) ++distinct;
    if (distinct < 3)
        throw InputError("bin3: need at least 3 distinct values, got " + std::to_string(distinct));
    const std::size_t n = values.size();
    Bin3 b;
    b.t1 = values[(n + 2) / 3 - 1];       // ceil(n/3)-th order statistic
    b.t2 = values[(2 * n + 2) / 3 - 1];   // ceil(2n/3)-th
    return b;
}

int count_connectors(const std::vector<std::string>& tokens,
                     const std::vector<std::string>& connectors) {
    std::vector<std::vector<std::string>> patterns;
    for (const std::string& c : connectors) {
        std::vector<std::string> words = split_words(lower(c));
        if (!words.empty()) patterns.push_back(std::move(words));
    }
    std::stable_sort(patterns.begin(), patterns.end(),
                     [](const auto& a, const auto& b) { return a.size() > b.size(); });

    std::vector<std::string> low;
    low.reserve(tokens.size());
    for (const std::string& t : tokens) low.push_back(lower(t));

    int count = 0;
    std::size_t i = 0;
    while (i < low.size()) {
        std::size_t advance = 1;
        for (const auto& pat : patterns) {
            if (i + pat.size() > low.size()) continue;
            bool ok = true;
            for (std::size_t k = 0; k < pat.size(); ++k)
                if (low[i + k] != pat[k]) {
                    ok = false;
                    break;
                }
            if (ok) {
                ++count;
                advance = pat.size();
                break;
            }
        }
        i += advance;
    }
    return count;
}

std::optional<double> raw_value(const TaskSpec& task, const SentenceRecord& r,
                                const Resources& res) {
    const double n = static_cast<double>(r.n());
    if (task.name == "WordLen") {
        double chars = 0.0;
        for (const std::string& t : r.tokens) chars += static_cast<double>(t.size());
        return (chars / n) / n;  // mean word length, normalized by sentence length
    }
    if (task.name == "LD") {
        double content = 0.0;
        for (const std::string& tag : r.pos) content += pos_is_content(tag) ? 1.0 : 0.0;
        return content / n;
    }
    if (task.name == "DP") {
        if (!r.sense_counts) return std::nullopt;
        double total = 0.0;
        for (int c : *r.sense_counts) total += c;
        return total;
    }
    if (task.name == "OOV") {
        double oov = 0.0;
        for (const std::string& t : r.tokens)
            if (!res.common_words.count(lower(t))) oov += 1.0;
        return oov;
    }
    if (task.name == "CNC") {
        if (!r.complex_nominals || !r.clauses || *r.clauses == 0) return std::nullopt;
        return static_cast<double>(*r.complex_nominals) / static_cast<double>(*r.clauses);
    }
    if (task.name == "SenLen") return n;
    if (task.name == "DCC")
        return static_cast<double>(count_connectors(r.tokens, res.connectors));
    throw std::logic_error("raw_value: task " + task.name + " has no scalar measure");
}

std::optional<std::string> tense_label(const SentenceRecord& r) {
    if (r.tense) return r.tense;
    const int n = r.n();
    for (int i = 0; i < n; ++i) {
        if (r.pos[i] != "MD") continue;
        const std::string w = lower(r.tokens[i]);
        if (w != "will" && w != "shall") continue;
        for (int j = i + 1; j < n; ++j)
            if (r.pos[j] == "VB") return std::string("future");
    }
    for (int i = 0; i < n; ++i)
        if (r.pos[i] == "VBP" || r.pos[i] == "VBZ" || r.pos[i] == "VBG")
            return std::string("present");
    for (int i = 0; i < n; ++i)
        if (r.pos[i] == "VBD" || r.pos[i] == "VBN") return std::string("past");
    return std::nullopt;
}

std::optional<std::string> number_label(const SentenceRecord& r, bool subject) {
    const std::optional<int>& idx = subject ? r.subject_index : r.object_index;
    if (!idx) return std::nullopt;
    const std::string& tag = r.pos[*idx];
    if (tag == "NN" || tag == "NNP") return std::string("singular");
    if (tag == "NNS" || tag == "NNPS") return std::string("plural");
    return std::nullopt;
}

int bshift_swap_index(const std::string& sentence_id, int n, std::uint64_t seed) {
    if (n < 2) throw std::invalid_argument("bshift_swap_index: sentence of " + std::to_string(n) +
                                           " tokens has no adjacent pair");
    Rng rng(mix_seed(seed, {"bshift", sentence_id}));
    return static_cast<int>(rng.below(static_cast<std::uint64_t>(n - 1)));
}

TaskData build_task_fold(const Corpus& corpus, const TaskSpec& spec, const Resources& res,
                         const std::vector<int>& fold_of, int test_fold, std::uint64_t seed) {
    if (fold_of.size() != static_cast<std::size_t>(corpus.size()))
        throw std::invalid_argument("build_task_fold: fold assignment size mismatch");
    TaskData data;
    data.spec = spec;

    auto add_item = [&](TaskItem item) {
        data.item_fold.push_back(fold_of[item.record_index]);
        data.items.push_back(std::move(item));
    };

    if (spec.name == "POS") {
        std::set<std::string> train_tags;
        for (int ri = 0; ri < corpus.size(); ++ri)
            if (fold_of[ri] != test_fold)
                for (const std::string& tag : corpus.records[ri].pos) train_tags.insert(tag);
        data.label_vocab.assign(train_tags.begin(), train_tags.end());
        data.label_vocab.push_back("OTHER");
        const int other = static_cast<int>(data.label_vocab.size()) - 1;
        std::unordered_map<std::string, int> id_of;
        for (std::size_t i = 0; i < data.label_vocab.size(); ++i)
            id_of.emplace(data.label_vocab[i], static_cast<int>(i));
        for (int ri = 0; ri < corpus.size(); ++ri) {
            TaskItem item;
            item.record_index = ri;
            for (const std::string& tag : corpus.records[ri].pos) {
                auto it = id_of.find(tag);
                item.label_seq.push_back(it == id_of.end() ? other : it->second);
            }
            add_item(std::move(item));
        }
    } else if (spec.name == "BShift") {
        data.label_vocab = kBShiftVocab;
        for (int ri = 0; ri < corpus.size(); ++ri) {
            const SentenceRecord& r = corpus.records[ri];
            if (r.n() < 2) {
                ++data.skipped;
                continue;
            }
            TaskItem pos_item;
            pos_item.record_index = ri;
            pos_item.label = 0;
            add_item(std::move(pos_item));
            TaskItem neg;
            neg.record_index = ri;
            neg.label = 1;
            neg.bshift_swap = bshift_swap_index(r.id, r.n(), seed);
            add_item(std::move(neg));
        }
    } else if (spec.name == "Tense") {
        std::vector<std::pair<int, std::string>> labeled;
        for (int ri = 0; ri < corpus.size(); ++ri) {
            std::optional<std::string> lab = tense_label(corpus.records[ri]);
            if (!lab) {
                ++data.skipped;
                continue;
            }
            labeled.emplace_back(ri, *lab);
        }
        bool any_future = false;
        for (const auto& [ri, lab] : labeled) any_future = any_future || lab == "future";
        data.label_vocab = any_future ? kTenseVocab
                                      : std::vector<std::string>{"present", "past"};
        for (const auto& [ri, lab] : labeled) {
            TaskItem item;
            item.record_index = ri;
            item.label = static_cast<int>(
                std::find(data.label_vocab.begin(), data.label_vocab.end(), lab) -
                data.label_vocab.begin());
            add_item(std::move(item));
        }
    } else if (spec.name == "SubjNum" || spec.name == "ObjNum") {
        data.label_vocab = kNumberVocab;
        const bool subject = spec.name == "SubjNum";
        for (int ri = 0; ri < corpus.size(); ++ri) {
            std::optional<std::string> lab = number_label(corpus.records[ri], subject);
            if (!lab) {
                ++data.skipped;
                continue;
            }
            TaskItem item;
            item.record_index = ri;
            item.label = (*lab == "singular") ? 0 : 1;
            add_item(std::move(item));
        }
    } else {
        // Scalar tasks: bin thresholds fitted on training-fold values only.
        data.label_vocab = kBinVocab;
        std::vector<std::pair<int, double>> usable;
        for (int ri = 0; ri < corpus.size(); ++ri) {
            std::optional<double> v = raw_value(spec, corpus.records[ri], res);
            if (!v) {
                ++data.skipped;
                continue;
            }
            usable.emplace_back(ri, *v);
        }
        std::vector<double> train_values;
        for (const auto& [ri, v] : usable)
            if (fold_of[ri] != test_fold) train_values.push_back(v);
        Bin3 bins;
        try {
            bins = bin3(train_values);
        } catch (const InputError& e) {
            throw InputError("task " + spec.name + ", test fold " + std::to_string(test_fold) +
                             ": " + e.what());
        }
        for (const auto& [ri, v] : usable) {
            TaskItem item;
            item.record_index = ri;
            item.label = bins.assign(v);
            add_item(std::move(item));
        }
    }

    if (data.items.empty())
        throw InputError("task " + spec.name + ": no usable records; requires " +
                         (spec.required.empty() ? std::string("(nothing beyond signals)")
                                                : join(spec.required, ", ")));
    return data;
}

void save_task_items(const std::string& path, const TaskData& data, SignalType signal,
                     const Corpus& corpus) {
    std::ofstream out(path);
    if (!out) throw InputError(path + ": cannot write");
    for (std::size_t i = 0; i < data.items.size(); ++i) {
        const TaskItem& item = data.items[i];
        json j;
        j["sentence_id"] = corpus.records[item.record_index].id;
        j["task"] = data.spec.name;
        j["signal_type"] = signal_type_name(signal);
        j["fold"] = data.item_fold[i];
        if (data.spec.kind == TaskKind::Sequence) {
            json seq = json::array();
            for (int id : item.label_seq) seq.push_back(data.label_vocab[id]);
            j["label_sequence"] = std::move(seq);
        } else {
            j["label"] = data.label_vocab[item.label];
        }
        if (item.bshift_swap >= 0) j["bshift_swap_index"] = item.bshift_swap;
        out << j.dump() << "\n";
    }
}

TaskData load_task_items(const std::string& path, const Corpus& corpus) {
    std::ifstream in(path);
    if (!in) throw InputError(path + ": cannot open");
    std::unordered_map<std::string, int> rec_of;
    for (int ri = 0; ri < corpus.size(); ++ri) rec_of.emplace(corpus.records[ri].id, ri);

    struct Row {
        int record_index;
        int fold;
        std::string label;
        std::vector<std::string> label_seq;
        int bshift_swap;
    };
    std::vector<Row> rows;
    std::string task_name;
    std::set<std::string> seen_labels;

    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        json j = json::parse(line, nullptr, false);
        if (j.is_discarded() || !j.is_object())
            throw InputError(path + ":" + std::to_string(line_no) + ": invalid JSON");
        Row row;
        const std::string id = j.at("sentence_id").get<std::string>();
        auto it = rec_of.find(id);
        if (it == rec_of.end())
            throw InputError(path + ":" + std::to_string(line_no) + ": unknown sentence '" + id + "'");
        row.record_index = it->second;
        const std::string t = j.at("task").get<std::string>();
        if (task_name.empty()) task_name = t;
        else if (task_name != t)
            throw InputError(path + ":" + std::to_string(line_no) + ": mixed tasks " + task_name +
                             " and " + t);
        row.fold = j.at("fold").get<int>();
        if (j.contains("label_sequence")) {
            for (const json& s : j["label_sequence"]) {
                row.label_seq.push_back(s.get<std::string>());
                seen_labels.insert(row.label_seq.back());
            }
        } else {
            row.label = j.at("label").get<std::string>();
            seen_labels.insert(row.label);
        }
        row.bshift_swap = j.contains("bshift_swap_index") ? j["bshift_swap_index"].get<int>() : -1;
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw InputError(path + ": no items");

    TaskData data;
    data.spec = TaskSpec::by_name(task_name);
    if (data.spec.kind == TaskKind::Sequence) {
        seen_labels.erase("OTHER");
        data.label_vocab.assign(seen_labels.begin(), seen_labels.end());
        data.label_vocab.push_back("OTHER");
    } else if (data.spec.name == "BShift") {
        data.label_vocab = kBShiftVocab;
    } else if (data.spec.name == "Tense") {
        data.label_vocab = seen_labels.count("future")
                               ? kTenseVocab
                               : std::vector<std::string>{"present", "past"};
    } else if (data.spec.name == "SubjNum" || data.spec.name == "ObjNum") {
        data.label_vocab = kNumberVocab;
    } else {
        data.label_vocab = kBinVocab;
    }
    std::unordered_map<std::string, int> id_of;
    for (std::size_t i = 0; i < data.label_vocab.size(); ++i)
        id_of.emplace(data.label_vocab[i], static_cast<int>(i));

    for (const Row& row : rows) {
        TaskItem item;
        item.record_index = row.record_index;
        item.bshift_swap = row.bshift_swap;
        if (data.spec.kind == TaskKind::Sequence) {
            for (const std::string& s : row.label_seq) item.label_seq.push_back(id_of.at(s));
        } else {
            auto f = id_of.find(row.label);
            if (f == id_of.end()) throw InputError(path + ": label '" + row.label +
                                                   "' not in the " + task_name + " vocabulary");
            item.label = f->second;
        }
        data.item_fold.push_back(row.fold);
        data.items.push_back(std::move(item));
    }
    return data;
}

}  // namespace cogbridge
