#include "cogbridge/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <stdexcept>
#include <unordered_map>

#include "cogbridge/rng.hpp"
#include "json.hpp"

namespace cogbridge {

namespace {

using nlohmann::json;

std::vector<std::string> split_tabs(const std::string& line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        std::size_t tab = line.find('\t', start);
        if (tab == std::string::npos) {
            out.push_back(line.substr(start));
            return out;
        }
        out.push_back(line.substr(start, tab - start));
        start = tab + 1;
    }
}

void strip_cr(std::string& s) {
    if (!s.empty() && s.back() == '\r') s.pop_back();
}

[[noreturn]] void fail_at(const std::string& path, std::size_t line_no, const std::string& what) {
    throw InputError(path + ":" + std::to_string(line_no) + ": " + what);
}

double parse_real(const std::string& field, const std::string& path, std::size_t line_no,
                  const std::string& col) {
    double v = 0.0;
    const char* first = field.data();
    const char* last = field.data() + field.size();
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last)
        fail_at(path, line_no, "cannot parse '" + field + "' as a number in column " + col);
    if (!std::isfinite(v)) fail_at(path, line_no, "non-finite value in column " + col);
    return v;
}

int parse_int(const std::string& field, const std::string& path, std::size_t line_no,
              const std::string& col) {
    int v = 0;
    const char* first = field.data();
    const char* last = field.data() + field.size();
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last)
        fail_at(path, line_no, "cannot parse '" + field + "' as an integer in column " + col);
    return v;
}

struct PendingSentence {
    std::string id;
    std::vector<std::string> tokens;
    std::vector<std::vector<double>> rows;  // 25 values each
    std::size_t first_line = 0;
};

SentenceRecord finish_sentence(PendingSentence&& p) {
    SentenceRecord r;
    r.id = std::move(p.id);
    const int n = static_cast<int>(p.tokens.size());
    r.tokens = std::move(p.tokens);
    const int de = SignalSchema::eye().d();
    const int dg = SignalSchema::eeg().d();
    r.eye = Tensor2(n, de);
    r.eeg = Tensor2(n, dg);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < de; ++j) r.eye.at(i, j) = p.rows[i][j];
        for (int j = 0; j < dg; ++j) r.eeg.at(i, j) = p.rows[i][de + j];
    }
    return r;
}

std::string json_type_name(const json& v) { return std::string(v.type_name()); }

}  // namespace

const char* signal_type_name(SignalType t) { return t == SignalType::Eye ? "eye" : "eeg"; }

SignalType parse_signal_type(const std::string& s) {
    if (s == "eye") return SignalType::Eye;
    if (s == "eeg") return SignalType::Eeg;
    throw InputError("unknown signal type '" + s + "' (want eye or eeg)");
}

const SignalSchema& SignalSchema::eye() {
    static const SignalSchema s{SignalType::Eye,
                                {"FFD", "FPD", "NFIX", "FP", "MFD", "TFD", "NR", "RRP", "TRD",
                                 "w-2FP", "w-1FP", "w+1FP", "w+2FP", "w-2FD", "w-1FD", "w+1FD",
                                 "w+2FD"}};
    return s;
}

const SignalSchema& SignalSchema::eeg() {
    static const SignalSchema s{SignalType::Eeg, {"t1", "t2", "a1", "a2", "b1", "b2", "g1", "g2"}};
    return s;
}

const SignalSchema& SignalSchema::of(SignalType t) { return t == SignalType::Eye ? eye() : eeg(); }

int Corpus::n_max() const {
    int m = 0;
    for (const SentenceRecord& r : records) m = std::max(m, r.n());
    return m;
}

const NormStats& Corpus::stats(SignalType t) const {
    const std::optional<NormStats>& s = (t == SignalType::Eye) ? eye_stats : eeg_stats;
    if (!s) throw std::logic_error("corpus has no normalization stats; call normalize() first");
    return *s;
}

std::uint64_t fingerprint_ids(std::vector<std::string> ids) {
    std::sort(ids.begin(), ids.end());
    std::uint64_t h = 1469598103934665603ull;  // FNV-1a offset basis
    auto eat = [&h](char c) {
        h ^= static_cast<unsigned char>(c);
        h *= 1099511628211ull;
    };
    for (const std::string& id : ids) {
        for (char c : id) eat(c);
        eat('\n');
    }
    return h;
}

Corpus load_corpus(const std::string& signals_path, const std::string& annotations_path) {
    std::ifstream sig(signals_path);
    if (!sig) throw InputError(signals_path + ": cannot open");

    const SignalSchema& eye = SignalSchema::eye();
    const SignalSchema& eeg = SignalSchema::eeg();
    std::vector<std::string> want_header = {"sentence_id", "token_index", "token"};
    want_header.insert(want_header.end(), eye.feature_names.begin(), eye.feature_names.end());
    want_header.insert(want_header.end(), eeg.feature_names.begin(), eeg.feature_names.end());

    std::string line;
    std::size_t line_no = 0;
    if (!std::getline(sig, line)) throw InputError(signals_path + ": empty file");
    ++line_no;
    strip_cr(line);
    std::vector<std::string> header = split_tabs(line);
    if (header.size() != want_header.size())
        fail_at(signals_path, line_no,
                "header has " + std::to_string(header.size()) + " columns, want " +
                    std::to_string(want_header.size()));
    for (std::size_t i = 0; i < header.size(); ++i)
        if (header[i] != want_header[i])
            fail_at(signals_path, line_no,
                    "unknown feature column '" + header[i] + "' at position " + std::to_string(i) +
                        " (want '" + want_header[i] + "')");

    Corpus corpus;
    std::unordered_map<std::string, std::size_t> seen_ids;  // id -> first line
    PendingSentence cur;

    auto flush = [&]() {
        if (cur.id.empty()) return;
        corpus.records.push_back(finish_sentence(std::move(cur)));
        cur = PendingSentence{};
    };

    const std::size_t n_values = want_header.size() - 3;
    while (std::getline(sig, line)) {
        ++line_no;
        strip_cr(line);
        if (line.empty()) continue;
        std::vector<std::string> f = split_tabs(line);
        if (f.size() != want_header.size())
            fail_at(signals_path, line_no,
                    "row has " + std::to_string(f.size()) + " columns, want " +
                        std::to_string(want_header.size()));
        const std::string& id = f[0];
        if (id.empty()) fail_at(signals_path, line_no, "empty sentence_id");
        const int tok_idx = parse_int(f[1], signals_path, line_no, "token_index");

        if (id != cur.id) {
            flush();
            auto [it, fresh] = seen_ids.emplace(id, line_no);
            if (!fresh)
                fail_at(signals_path, line_no,
                        "sentence '" + id + "' reappears after line " + std::to_string(it->second) +
                            "; rows of one sentence must be contiguous");
            cur.id = id;
            cur.first_line = line_no;
        }
        const int want_idx = static_cast<int>(cur.tokens.size());
        if (tok_idx != want_idx)
            fail_at(signals_path, line_no,
                    "sentence '" + id + "': token_index " + std::to_string(tok_idx) + ", want " +
                        std::to_string(want_idx));
        cur.tokens.push_back(f[2]);
        std::vector<double> row(n_values);
        for (std::size_t j = 0; j < n_values; ++j)
            row[j] = parse_real(f[3 + j], signals_path, line_no, want_header[3 + j]);
        cur.rows.push_back(std::move(row));
    }
    flush();
    if (corpus.records.empty()) throw InputError(signals_path + ": no sentences");

    // Annotations: one JSON object per line, exactly one per sentence id.
    std::ifstream ann(annotations_path);
    if (!ann) throw InputError(annotations_path + ": cannot open");
    std::unordered_map<std::string, std::size_t> ann_lines;
    std::unordered_map<std::string, json> by_id;
    line_no = 0;
    while (std::getline(ann, line)) {
        ++line_no;
        strip_cr(line);
        if (line.empty()) continue;
        json j = json::parse(line, nullptr, false);
        if (j.is_discarded()) fail_at(annotations_path, line_no, "invalid JSON");
        if (!j.is_object()) fail_at(annotations_path, line_no, "want a JSON object");
        if (!j.contains("sentence_id") || !j["sentence_id"].is_string())
            fail_at(annotations_path, line_no, "missing string field 'sentence_id'");
        const std::string id = j["sentence_id"].get<std::string>();
        auto [it, fresh] = ann_lines.emplace(id, line_no);
        if (!fresh)
            fail_at(annotations_path, line_no,
                    "duplicate annotations for sentence '" + id + "' (first at line " +
                        std::to_string(it->second) + ")");
        by_id.emplace(id, std::move(j));
    }

    for (SentenceRecord& r : corpus.records) {
        auto found = by_id.find(r.id);
        if (found == by_id.end())
            throw InputError(annotations_path + ": no annotations for sentence '" + r.id + "'");
        const json& j = found->second;
        const std::size_t at = ann_lines[r.id];
        auto bad = [&](const std::string& what) { fail_at(annotations_path, at, what); };

        if (!j.contains("pos") || !j["pos"].is_array()) bad("sentence '" + r.id + "': missing array field 'pos'");
        std::vector<std::string> pos;
        for (const json& t : j["pos"]) {
            if (!t.is_string()) bad("sentence '" + r.id + "': 'pos' entries must be strings");
            pos.push_back(t.get<std::string>());
        }
        if (static_cast<int>(pos.size()) != r.n())
            bad("sentence '" + r.id + "': " + std::to_string(pos.size()) + " POS tags for a " +
                std::to_string(r.n()) + "-token sentence");
        r.pos = std::move(pos);

        auto opt_int = [&](const char* key) -> std::optional<int> {
            if (!j.contains(key) || j[key].is_null()) return std::nullopt;
            if (!j[key].is_number_integer())
                bad("sentence '" + r.id + "': '" + key + "' must be an integer or null, got " +
                    json_type_name(j[key]));
            return j[key].get<int>();
        };

        if (j.contains("sense_counts") && !j["sense_counts"].is_null()) {
            if (!j["sense_counts"].is_array())
                bad("sentence '" + r.id + "': 'sense_counts' must be an array or null");
            std::vector<int> sc;
            for (const json& t : j["sense_counts"]) {
                if (!t.is_number_integer() || t.get<int>() < 0)
                    bad("sentence '" + r.id + "': 'sense_counts' entries must be non-negative integers");
                sc.push_back(t.get<int>());
            }
            if (static_cast<int>(sc.size()) != r.n())
                bad("sentence '" + r.id + "': " + std::to_string(sc.size()) +
                    " sense counts for a " + std::to_string(r.n()) + "-token sentence");
            r.sense_counts = std::move(sc);
        }

        r.complex_nominals = opt_int("complex_nominals");
        if (r.complex_nominals && *r.complex_nominals < 0)
            bad("sentence '" + r.id + "': negative 'complex_nominals'");
        r.clauses = opt_int("clauses");
        if (r.clauses && *r.clauses < 0) bad("sentence '" + r.id + "': negative 'clauses'");
        r.subject_index = opt_int("subject_index");
        r.object_index = opt_int("object_index");
        for (const char* key : {"subject_index", "object_index"}) {
            const std::optional<int>& v =
                (key[0] == 's') ? r.subject_index : r.object_index;
            if (v && (*v < 0 || *v >= r.n()))
                bad("sentence '" + r.id + "': '" + key + "' " + std::to_string(*v) +
                    " out of range for " + std::to_string(r.n()) + " tokens");
        }
        if (j.contains("tense") && !j["tense"].is_null()) {
            if (!j["tense"].is_string())
                bad("sentence '" + r.id + "': 'tense' must be a string or null");
            const std::string t = j["tense"].get<std::string>();
            if (t != "present" && t != "past" && t != "future")
                bad("sentence '" + r.id + "': 'tense' must be present, past, or future, got '" + t + "'");
            r.tense = t;
        }
        by_id.erase(found);
    }
    if (!by_id.empty()) {
        std::vector<std::string> extra;
        for (const auto& [id, _] : by_id) extra.push_back(id);
        std::sort(extra.begin(), extra.end());
        throw InputError(annotations_path + ": annotations for unknown sentence '" + extra[0] +
                         "' (no signal rows)");
    }
    return corpus;
}

std::string real_to_string(double v) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    if (ec != std::errc()) throw std::logic_error("real_to_string: buffer too small");
    return std::string(buf, ptr);
}

void save_corpus(const Corpus& corpus, const std::string& signals_path,
                 const std::string& annotations_path) {
    std::ofstream sig(signals_path);
    if (!sig) throw InputError(signals_path + ": cannot write");
    sig << "sentence_id\ttoken_index\ttoken";
    for (const std::string& f : SignalSchema::eye().feature_names) sig << '\t' << f;
    for (const std::string& f : SignalSchema::eeg().feature_names) sig << '\t' << f;
    sig << '\n';
    for (const SentenceRecord& r : corpus.records) {
        for (int i = 0; i < r.n(); ++i) {
            sig << r.id << '\t' << i << '\t' << r.tokens[i];
            for (int j = 0; j < r.eye.cols; ++j) sig << '\t' << real_to_string(r.eye.at(i, j));
            for (int j = 0; j < r.eeg.cols; ++j) sig << '\t' << real_to_string(r.eeg.at(i, j));
            sig << '\n';
        }
    }

    std::ofstream ann(annotations_path);
    if (!ann) throw InputError(annotations_path + ": cannot write");
    for (const SentenceRecord& r : corpus.records) {
        json j;
        j["sentence_id"] = r.id;
        j["pos"] = r.pos;
        j["sense_counts"] = r.sense_counts ? json(*r.sense_counts) : json(nullptr);
        j["complex_nominals"] = r.complex_nominals ? json(*r.complex_nominals) : json(nullptr);
        j["clauses"] = r.clauses ? json(*r.clauses) : json(nullptr);
        j["subject_index"] = r.subject_index ? json(*r.subject_index) : json(nullptr);
        j["object_index"] = r.object_index ? json(*r.object_index) : json(nullptr);
        j["tense"] = r.tense ? json(*r.tense) : json(nullptr);
        ann << j.dump() << "\n";
    }
}

NormStats fit_normalization(const Corpus& corpus, SignalType type,
                            const std::vector<std::string>& fit_ids) {
    if (fit_ids.empty()) throw std::invalid_argument("fit_normalization: empty fit split");
    std::unordered_map<std::string, const SentenceRecord*> index;
    for (const SentenceRecord& r : corpus.records) index.emplace(r.id, &r);

    const int d = SignalSchema::of(type).d();
    NormStats st;
    st.type = type;
    st.mean.assign(d, 0.0);
    st.stdev.assign(d, 1.0);
    st.constant.assign(d, false);
    st.fit_fingerprint = fingerprint_ids(fit_ids);

    std::vector<double> lo(d, 0.0), hi(d, 0.0), sum(d, 0.0);
    std::size_t rows = 0;
    bool first_row = true;
    for (const std::string& id : fit_ids) {
        auto it = index.find(id);
        if (it == index.end())
            throw std::invalid_argument("fit_normalization: unknown sentence id '" + id + "'");
        const Tensor2& X = it->second->signals(type);
        for (int i = 0; i < X.rows; ++i, ++rows) {
            const double* xi = X.row(i);
            for (int jc = 0; jc < d; ++jc) {
                sum[jc] += xi[jc];
                if (first_row) {
                    lo[jc] = hi[jc] = xi[jc];
                } else {
                    lo[jc] = std::min(lo[jc], xi[jc]);
                    hi[jc] = std::max(hi[jc], xi[jc]);
                }
            }
            first_row = false;
        }
    }
    if (rows == 0) throw std::invalid_argument("fit_normalization: fit split has no tokens");

    for (int jc = 0; jc < d; ++jc) st.mean[jc] = sum[jc] / static_cast<double>(rows);
    std::vector<double> sq(d, 0.0);
    for (const std::string& id : fit_ids) {
        const Tensor2& X = index.at(id)->signals(type);
        for (int i = 0; i < X.rows; ++i) {
            const double* xi = X.row(i);
            for (int jc = 0; jc < d; ++jc) {
                const double c = xi[jc] - st.mean[jc];
                sq[jc] += c * c;
            }
        }
    }
    for (int jc = 0; jc < d; ++jc) {
        if (lo[jc] == hi[jc]) {
            st.constant[jc] = true;
            st.mean[jc] = lo[jc];
            st.stdev[jc] = 1.0;
        } else {
            st.stdev[jc] = std::sqrt(sq[jc] / static_cast<double>(rows));  // population std
            if (st.stdev[jc] <= 0.0) {
                st.constant[jc] = true;
                st.stdev[jc] = 1.0;
            }
        }
    }
    return st;
}

Corpus apply_normalization(const Corpus& corpus, const NormStats& eye, const NormStats& eeg) {
    if (eye.type != SignalType::Eye || eeg.type != SignalType::Eeg)
        throw std::invalid_argument("apply_normalization: stats passed in the wrong order");
    Corpus out = corpus;
    for (SentenceRecord& r : out.records) {
        for (const NormStats* st : {&eye, &eeg}) {
            Tensor2& X = r.signals(st->type);
            for (int i = 0; i < X.rows; ++i) {
                double* xi = X.row(i);
                for (int jc = 0; jc < st->d(); ++jc)
                    xi[jc] = st->constant[jc] ? 0.0 : (xi[jc] - st->mean[jc]) / st->stdev[jc];
            }
        }
    }
    out.eye_stats = eye;
    out.eeg_stats = eeg;
    return out;
}

Corpus normalize(const Corpus& corpus, const std::vector<std::string>& fit_ids) {
    return apply_normalization(corpus, fit_normalization(corpus, SignalType::Eye, fit_ids),
                               fit_normalization(corpus, SignalType::Eeg, fit_ids));
}

SignalMatrix pad(const SentenceRecord& record, int n_max, SignalType type) {
    const Tensor2& X = record.signals(type);
    if (record.n() > n_max)
        throw std::invalid_argument("pad: sentence '" + record.id + "' has " +
                                    std::to_string(record.n()) + " tokens, N_max " +
                                    std::to_string(n_max));
    SignalMatrix m;
    m.type = type;
    m.n = record.n();
    m.H = Tensor2(n_max, X.cols);
    for (int i = 0; i < X.rows; ++i)
        std::copy(X.row(i), X.row(i) + X.cols, m.H.row(i));
    return m;
}

std::vector<int> make_folds(const Corpus& corpus, int k, std::uint64_t seed) {
    const int m = corpus.size();
    if (k < 2) throw InputError("make_folds: k must be at least 2, got " + std::to_string(k));
    if (k > m)
        throw InputError("make_folds: k=" + std::to_string(k) + " exceeds corpus size " +
                         std::to_string(m));
    std::vector<int> order(m);
    for (int i = 0; i < m; ++i) order[i] = i;
    Rng rng(mix_seed(seed, {"folds"}));
    rng.shuffle(order);

    std::vector<int> fold(m, -1);
    const int base = m / k, rem = m % k;
    int pos = 0;
    for (int f = 0; f < k; ++f) {
        const int sz = base + (f < rem ? 1 : 0);
        for (int i = 0; i < sz; ++i) fold[order[pos++]] = f;
    }
    return fold;
}

std::vector<std::string> read_lines(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError(path + ": cannot open");
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        strip_cr(line);
        if (!line.empty()) lines.push_back(line);
    }
    return lines;
}

Resources load_resources(const std::string& common_words_path,
                         const std::string& connectors_path) {
    Resources res;
    for (std::string w : read_lines(common_words_path)) {
        std::transform(w.begin(), w.end(), w.begin(),
                       [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
        res.common_words.insert(std::move(w));
    }
    for (std::string c : read_lines(connectors_path)) {
        std::transform(c.begin(), c.end(), c.begin(),
                       [](unsigned char c2) { return static_cast<char>(std::tolower(c2)); });
        res.connectors.push_back(std::move(c));
    }
    return res;
}

}  // namespace cogbridge
