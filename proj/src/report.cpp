#include "cogbridge/report.hpp"

#include <charconv>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace cogbridge {

namespace {

std::string csv_escape(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                cur += '"';
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                cur += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    fields.push_back(cur);
    return fields;
}

double parse_real(const std::string& s, const std::string& path) {
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size())
        throw InputError(path + ": bad real value '" + s + "'");
    return v;
}

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw InputError(path + ": cannot write");
    return out;
}

}  // namespace

AttentionGrid empty_attention_grid(SignalType signal) {
    AttentionGrid grid;
    grid.signal = signal;
    grid.features = SignalSchema::of(signal).feature_names;
    for (const TaskSpec& t : TaskSpec::all()) grid.tasks.push_back(t.name);
    grid.columns.resize(grid.tasks.size());
    return grid;
}

AttentionGrid load_attention_grid(const std::string& path, SignalType signal) {
    AttentionGrid grid = empty_attention_grid(signal);
    std::ifstream in(path);
    if (!in) return grid;

    std::string line;
    if (!std::getline(in, line)) throw InputError(path + ": empty attention grid");
    std::vector<std::string> header = split_csv_line(line);
    if (header.size() != grid.tasks.size() + 1 || header[0] != "feature")
        throw InputError(path + ": unexpected attention grid header");
    for (std::size_t t = 0; t < grid.tasks.size(); ++t)
        if (header[t + 1] != grid.tasks[t])
            throw InputError(path + ": unexpected task column '" + header[t + 1] + "'");

    std::vector<std::vector<std::string>> cells;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> f = split_csv_line(line);
        if (f.size() != header.size())
            throw InputError(path + ": row with " + std::to_string(f.size()) + " fields");
        cells.push_back(std::move(f));
    }
    if (cells.size() != grid.features.size())
        throw InputError(path + ": expected " + std::to_string(grid.features.size()) +
                         " feature rows, found " + std::to_string(cells.size()));
    for (std::size_t r = 0; r < cells.size(); ++r)
        if (cells[r][0] != grid.features[r])
            throw InputError(path + ": feature row '" + cells[r][0] + "' out of order");

    for (std::size_t t = 0; t < grid.tasks.size(); ++t) {
        bool any = false, all = true;
        for (std::size_t r = 0; r < cells.size(); ++r) {
            if (cells[r][t + 1].empty())
                all = false;
            else
                any = true;
        }
        if (!any) continue;
        if (!all) throw InputError(path + ": task '" + grid.tasks[t] + "' is partially filled");
        std::vector<double> col;
        for (std::size_t r = 0; r < cells.size(); ++r)
            col.push_back(parse_real(cells[r][t + 1], path));
        grid.columns[t] = std::move(col);
    }
    return grid;
}

void set_grid_column(AttentionGrid& grid, const std::string& task,
                     const std::vector<double>& scores) {
    if (scores.size() != grid.features.size())
        throw std::invalid_argument("set_grid_column: " + std::to_string(scores.size()) +
                                    " scores for " + std::to_string(grid.features.size()) +
                                    " features");
    for (std::size_t t = 0; t < grid.tasks.size(); ++t)
        if (grid.tasks[t] == task) {
            grid.columns[t] = scores;
            return;
        }
    throw std::invalid_argument("set_grid_column: unknown task '" + task + "'");
}

void save_attention_grid(const AttentionGrid& grid, const std::string& path) {
    std::ostringstream out;
    out << "feature";
    for (const std::string& t : grid.tasks) out << ',' << t;
    out << '\n';
    for (std::size_t r = 0; r < grid.features.size(); ++r) {
        out << csv_escape(grid.features[r]);
        for (std::size_t t = 0; t < grid.tasks.size(); ++t) {
            out << ',';
            if (!grid.columns[t].empty()) out << real_to_string(grid.columns[t][r]);
        }
        out << '\n';
    }
    write_atomic(path, out.str());
}

void write_fold_metrics(const std::string& path, const CvResult& cv) {
    std::ofstream out = open_out(path);
    out << "fold,n_train,n_test,best_epoch,flagged,flag_reason,macro_f1\n";
    for (const FoldResult& fr : cv.folds) {
        out << fr.fold << ',' << fr.n_train << ',' << fr.n_test << ',' << fr.best_epoch << ','
            << (fr.flagged ? 1 : 0) << ',' << csv_escape(fr.flag_reason) << ','
            << (fr.flagged ? std::string() : real_to_string(fr.macro_f1)) << '\n';
    }
}

void write_per_class(const std::string& path, const CvResult& cv) {
    std::ofstream out = open_out(path);
    out << "fold,label,support,precision,recall,f1\n";
    for (const FoldResult& fr : cv.folds) {
        if (fr.flagged) continue;
        for (const ClassScore& cs : fr.report.per_class) {
            if (!cs.present) continue;
            out << fr.fold << ','
                << csv_escape(fr.label_vocab[static_cast<std::size_t>(cs.label)]) << ','
                << cs.support << ',' << real_to_string(cs.precision) << ','
                << real_to_string(cs.recall) << ',' << real_to_string(cs.f1) << '\n';
        }
    }
}

void write_mask_curve(const std::string& path, const MaskReport& report, SignalType signal) {
    const SignalSchema& schema = SignalSchema::of(signal);
    std::ofstream out = open_out(path);
    out << "rank,feature_index,feature,f1_after,baseline_f1,delta\n";
    for (std::size_t i = 0; i < report.order.size(); ++i) {
        const int j = report.order[i];
        out << (i + 1) << ',' << j << ','
            << csv_escape(schema.feature_names[static_cast<std::size_t>(j)]) << ','
            << real_to_string(report.f1_after[i]) << ',' << real_to_string(report.baseline_f1)
            << ',' << real_to_string(report.f1_after[i] - report.baseline_f1) << '\n';
    }
}

void write_featsel_grid(const std::string& path, const FeatselGrid& grid) {
    std::ofstream out = open_out(path);
    out << "method,k,classifier,mean_f1,selected\n";
    for (const FeatselCell& cell : grid.cells) {
        std::string sel;
        for (std::size_t i = 0; i < cell.selected.size(); ++i) {
            if (i) sel += '|';
            sel += std::to_string(cell.selected[i]);
        }
        out << cell.method << ',' << cell.k << ',' << cell.classifier << ','
            << real_to_string(cell.mean_f1) << ',' << sel << '\n';
    }
}

void write_featsel_series(const std::string& path, const FeatselGrid& grid) {
    std::ofstream out = open_out(path);
    out << "k";
    for (const std::string& m : grid.methods)
        for (const char* c : {"lr", "lstm"}) out << ',' << m << '_' << c;
    out << '\n';
    for (int k : grid.k_sweep) {
        out << k;
        for (const std::string& m : grid.methods)
            for (const char* c : {"lr", "lstm"}) {
                out << ',';
                for (const FeatselCell& cell : grid.cells)
                    if (cell.method == m && cell.k == k && cell.classifier == c) {
                        out << real_to_string(cell.mean_f1);
                        break;
                    }
            }
        out << '\n';
    }
}

std::uint64_t fnv1a_bytes(const std::string& bytes) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

std::uint64_t fnv1a_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError(path + ": cannot read for digest");
    std::ostringstream buf;
    buf << in.rdbuf();
    return fnv1a_bytes(buf.str());
}

std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

void write_atomic(const std::string& path, const std::string& content) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) throw InputError(tmp + ": cannot write");
        out << content;
        if (!out) throw InputError(tmp + ": write failed");
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0)
        throw InputError(path + ": rename from temporary failed");
}

std::string iso8601_now() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

}  // namespace cogbridge
