#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <string>
#include <vector>

#include "cogbridge/corpus.hpp"
#include "cogbridge/rng.hpp"

using namespace cogbridge;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir() {
    static fs::path dir = [] {
        fs::path d = fs::temp_directory_path() / "cog_test_corpus";
        fs::remove_all(d);
        fs::create_directories(d);
        return d;
    }();
    return dir;
}

SentenceRecord make_record(const std::string& id, int n, std::uint64_t seed) {
    Rng rng(seed);
    SentenceRecord r;
    r.id = id;
    r.eye = Tensor2(n, 17);
    r.eeg = Tensor2(n, 8);
    for (double& v : r.eye.data) v = rng.uniform(-3.0, 3.0);
    for (double& v : r.eeg.data) v = rng.uniform(-3.0, 3.0);
    for (int i = 0; i < n; ++i) {
        r.tokens.push_back("tok" + std::to_string(i));
        r.pos.push_back(i % 2 == 0 ? "NN" : "VBD");
    }
    r.sense_counts = std::vector<int>(static_cast<std::size_t>(n), 2);
    r.complex_nominals = 1;
    r.clauses = 2;
    r.subject_index = 0;
    r.object_index = n > 1 ? std::optional<int>(1) : std::nullopt;
    r.tense = "past";
    return r;
}

Corpus small_corpus(int m = 5) {
    Corpus c;
    for (int i = 0; i < m; ++i)
        c.records.push_back(make_record("s" + std::to_string(i), 2 + i % 3, 100 + i));
    return c;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in);
    return std::string(std::istreambuf_iterator<char>(in), {});
}

void spit(const fs::path& p, const std::string& content) {
    std::ofstream out(p, std::ios::binary);
    REQUIRE(out);
    out << content;
}

}  // namespace

TEST_CASE("save -> load round-trip is lossless") {
    Corpus c = small_corpus();
    const fs::path sig = temp_dir() / "rt_signals.tsv";
    const fs::path ann = temp_dir() / "rt_annotations.jsonl";
    save_corpus(c, sig.string(), ann.string());
    Corpus back = load_corpus(sig.string(), ann.string());

    REQUIRE(back.size() == c.size());
    for (int i = 0; i < c.size(); ++i) {
        const SentenceRecord& a = c.records[i];
        const SentenceRecord& b = back.records[i];
        CHECK(a.id == b.id);
        CHECK(a.tokens == b.tokens);
        CHECK(a.pos == b.pos);
        CHECK(a.eye.data == b.eye.data);  // bit-exact via shortest round-trip
        CHECK(a.eeg.data == b.eeg.data);
        CHECK(a.sense_counts == b.sense_counts);
        CHECK(a.complex_nominals == b.complex_nominals);
        CHECK(a.clauses == b.clauses);
        CHECK(a.subject_index == b.subject_index);
        CHECK(a.object_index == b.object_index);
        CHECK(a.tense == b.tense);
    }

    // Saving the loaded corpus reproduces the files byte for byte.
    const fs::path sig2 = temp_dir() / "rt_signals2.tsv";
    const fs::path ann2 = temp_dir() / "rt_annotations2.jsonl";
    save_corpus(back, sig2.string(), ann2.string());
    CHECK(slurp(sig) == slurp(sig2));
    CHECK(slurp(ann) == slurp(ann2));
}

TEST_CASE("malformed inputs are rejected with located diagnostics") {
    Corpus c = small_corpus(3);
    const fs::path sig = temp_dir() / "bad_signals.tsv";
    const fs::path ann = temp_dir() / "bad_annotations.jsonl";
    save_corpus(c, sig.string(), ann.string());
    const std::string sig_text = slurp(sig);
    const std::string ann_text = slurp(ann);

    SUBCASE("wrong header column name") {
        std::string t = sig_text;
        t.replace(t.find("FFD"), 3, "XXX");
        spit(sig, t);
        CHECK_THROWS_AS(load_corpus(sig.string(), ann.string()), InputError);
    }
    SUBCASE("pos count mismatch names the sentence") {
        std::string t = ann_text;
        const std::string needle = "\"NN\",\"VBD\"";
        t.replace(t.find(needle), needle.size(), "\"NN\",\"VBD\",\"NN\",\"VBD\"");
        spit(ann, t);
        CHECK_THROWS_WITH_AS(load_corpus(sig.string(), ann.string()), doctest::Contains("s0"),
                             InputError);
    }
    SUBCASE("unparseable signal value") {
        std::string t = sig_text;
        const std::size_t tab = t.find('\t', t.find("\ns0\t") + 1);
        // Replace the first numeric field of s0 with junk.
        std::size_t start = t.find('\t', t.find("tok0")) + 1;
        std::size_t end = t.find('\t', start);
        t.replace(start, end - start, "1.5x");
        spit(sig, t);
        CHECK_THROWS_AS(load_corpus(sig.string(), ann.string()), InputError);
        (void)tab;
    }
    SUBCASE("non-contiguous sentence block") {
        // Move the first s0 row to the end, splitting its block with s1/s2.
        std::vector<std::string> lines;
        std::istringstream in(sig_text);
        for (std::string line; std::getline(in, line);) lines.push_back(line);
        std::string first_s0 = lines[1];
        lines.erase(lines.begin() + 1);
        lines.push_back(first_s0);
        std::string t;
        for (const std::string& l : lines) t += l + "\n";
        spit(sig, t);
        CHECK_THROWS_AS(load_corpus(sig.string(), ann.string()), InputError);
    }
    SUBCASE("token_index gap") {
        std::string t = sig_text;
        const std::size_t pos = t.find("s2\t1\t");
        t.replace(pos, 4, "s2\t7");
        spit(sig, t);
        CHECK_THROWS_AS(load_corpus(sig.string(), ann.string()), InputError);
    }
    SUBCASE("duplicate annotation line") {
        std::string t = ann_text + ann_text.substr(0, ann_text.find('\n') + 1);
        spit(ann, t);
        CHECK_THROWS_AS(load_corpus(sig.string(), ann.string()), InputError);
    }
    SUBCASE("annotation for unknown sentence") {
        std::string extra = ann_text.substr(0, ann_text.find('\n') + 1);
        extra.replace(extra.find("\"s0\""), 4, "\"s9\"");
        spit(ann, ann_text + extra);
        CHECK_THROWS_WITH_AS(load_corpus(sig.string(), ann.string()), doctest::Contains("s9"),
                             InputError);
    }
    SUBCASE("missing annotation for a sentence with signals") {
        std::string t = ann_text.substr(ann_text.find('\n') + 1);
        spit(ann, t);
        CHECK_THROWS_AS(load_corpus(sig.string(), ann.string()), InputError);
    }
    SUBCASE("bad tense value") {
        std::string t = ann_text;
        const std::size_t pos = t.find("\"past\"");
        t.replace(pos, 6, "\"soon\"");
        spit(ann, t);
        CHECK_THROWS_AS(load_corpus(sig.string(), ann.string()), InputError);
    }
}

TEST_CASE("z-scoring: exact stats on a tiny column") {
    // One record, three tokens; eye feature 0 takes values 1, 2, 3.
    Corpus c;
    SentenceRecord r = make_record("s0", 3, 1);
    r.eye.at(0, 0) = 1.0;
    r.eye.at(1, 0) = 2.0;
    r.eye.at(2, 0) = 3.0;
    // Make eye feature 1 constant.
    for (int i = 0; i < 3; ++i) r.eye.at(i, 1) = 4.2;
    c.records.push_back(r);

    NormStats st = fit_normalization(c, SignalType::Eye, {"s0"});
    CHECK(st.mean[0] == doctest::Approx(2.0).epsilon(1e-15));
    // Population std of {1,2,3} = sqrt(2/3).
    CHECK(st.stdev[0] == doctest::Approx(std::sqrt(2.0 / 3.0)).epsilon(1e-12));
    CHECK(st.constant[1]);
    CHECK(st.stdev[1] == 1.0);

    Corpus n = normalize(c, {"s0"});
    const double z = (1.0 - 2.0) / std::sqrt(2.0 / 3.0);
    CHECK(n.records[0].eye.at(0, 0) == doctest::Approx(z).epsilon(1e-12));
    CHECK(n.records[0].eye.at(0, 0) == doctest::Approx(-1.224744871).epsilon(1e-8));
    CHECK(n.records[0].eye.at(2, 0) == doctest::Approx(-z).epsilon(1e-12));
    // Constant columns normalize to exact zero.
    for (int i = 0; i < 3; ++i) CHECK(n.records[0].eye.at(i, 1) == 0.0);
}

TEST_CASE("normalization fitted on a training split differs from self-fit") {
    Corpus c = small_corpus(6);
    Corpus train_fit = normalize(c, {"s0", "s1", "s2", "s3"});
    Corpus self_fit = normalize(c, {"s0", "s1", "s2", "s3", "s4", "s5"});
    CHECK(train_fit.records[4].eye.data != self_fit.records[4].eye.data);
    CHECK(train_fit.stats(SignalType::Eye).fit_fingerprint !=
          self_fit.stats(SignalType::Eye).fit_fingerprint);

    SUBCASE("unknown fit id is rejected") {
        CHECK_THROWS_AS(normalize(c, {"s0", "nope"}), std::invalid_argument);
    }
    SUBCASE("empty fit set is rejected") {
        CHECK_THROWS_AS(normalize(c, {}), std::invalid_argument);
    }
}

TEST_CASE("fingerprint is order-insensitive and id-sensitive") {
    const std::uint64_t a = fingerprint_ids({"s1", "s2", "s3"});
    const std::uint64_t b = fingerprint_ids({"s3", "s1", "s2"});
    const std::uint64_t c = fingerprint_ids({"s1", "s2"});
    CHECK(a == b);
    CHECK(a != c);
}

TEST_CASE("pad keeps token rows and zeroes the rest") {
    Corpus c = small_corpus(1);
    Corpus n = normalize(c, {"s0"});
    const SentenceRecord& r = n.records[0];
    SignalMatrix sm = pad(r, 7, SignalType::Eeg);
    CHECK(sm.H.rows == 7);
    CHECK(sm.H.cols == 8);
    CHECK(sm.n == r.n());
    for (int i = 0; i < r.n(); ++i)
        for (int j = 0; j < 8; ++j) CHECK(sm.H.at(i, j) == r.eeg.at(i, j));
    for (int i = r.n(); i < 7; ++i)
        for (int j = 0; j < 8; ++j) CHECK(sm.H.at(i, j) == 0.0);
}

TEST_CASE("folds partition near-equally and deterministically") {
    Corpus c;
    for (int i = 0; i < 7; ++i) c.records.push_back(make_record("s" + std::to_string(i), 2, i));
    std::vector<int> f1 = make_folds(c, 5, 99);
    std::vector<int> f2 = make_folds(c, 5, 99);
    CHECK(f1 == f2);
    std::vector<int> counts(5, 0);
    for (int f : f1) {
        REQUIRE(f >= 0);
        REQUIRE(f < 5);
        ++counts[static_cast<std::size_t>(f)];
    }
    std::sort(counts.begin(), counts.end());
    CHECK(counts == std::vector<int>{1, 1, 1, 2, 2});

    CHECK(make_folds(c, 5, 100) != f1);  // seed moves the split
    CHECK_THROWS_AS(make_folds(c, 1, 0), InputError);
    CHECK_THROWS_AS(make_folds(c, 8, 0), InputError);
}

TEST_CASE("resources load lowercased") {
    const fs::path cw = temp_dir() / "common.txt";
    const fs::path cn = temp_dir() / "conn.txt";
    spit(cw, "The\ncat\nSAT\n");
    spit(cn, "Because\nas Well as\n");
    Resources r = load_resources(cw.string(), cn.string());
    CHECK(r.common_words.count("the") == 1);
    CHECK(r.common_words.count("sat") == 1);
    CHECK(r.common_words.count("The") == 0);
    REQUIRE(r.connectors.size() == 2);
    CHECK(r.connectors[0] == "because");
    CHECK(r.connectors[1] == "as well as");
}
