#include "cogbridge/selection.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "cogbridge/kernels.hpp"
#include "cogbridge/rng.hpp"

namespace cogbridge {

AggregatedDataset aggregate(const Corpus& corpus, const TaskData& data, SignalType signal,
                            bool use_max) {
    if (data.spec.kind == TaskKind::Sequence)
        throw InputError("aggregate: task " + data.spec.name +
                         " is a sequence task; per-sentence aggregation has no single label");
    AggregatedDataset out;
    out.feature_names = SignalSchema::of(signal).feature_names;
    const int d = static_cast<int>(out.feature_names.size());
    out.X = Tensor2(static_cast<int>(data.items.size()), d);
    out.n_classes = static_cast<int>(data.label_vocab.size());
    for (std::size_t i = 0; i < data.items.size(); ++i) {
        const TaskItem& item = data.items[i];
        const Tensor2& S = corpus.records[item.record_index].signals(signal);
        double* row = out.X.row(static_cast<int>(i));
        for (int j = 0; j < d; ++j) {
            if (use_max) {
                double mx = S.at(0, j);
                for (int t = 1; t < S.rows; ++t) mx = std::max(mx, S.at(t, j));
                row[j] = mx;
            } else {
                double s = 0.0;
                for (int t = 0; t < S.rows; ++t) s += S.at(t, j);
                row[j] = s / S.rows;
            }
        }
        out.y.push_back(item.label);
        out.item_fold.push_back(data.item_fold[i]);
    }
    return out;
}

namespace {

// Equal-frequency bin edges: the b-th edge is the ceil((b+1)m/B)-th order
// statistic; assignment takes the first bin whose edge is >= v (ties low).
std::vector<double> bin_edges(std::vector<double> values, int bins) {
    std::sort(values.begin(), values.end());
    const std::size_t m = values.size();
    std::vector<double> edges(bins - 1);
    for (int b = 0; b + 1 < bins; ++b) {
        const std::size_t pos = ((b + 1) * m + bins - 1) / bins;  // ceil((b+1)m/B)
        edges[b] = values[pos - 1];
    }
    return edges;
}

int assign_bin(double v, const std::vector<double>& edges) {
    for (std::size_t b = 0; b < edges.size(); ++b)
        if (v <= edges[b]) return static_cast<int>(b);
    return static_cast<int>(edges.size());
}

double gini(const std::vector<int>& counts, int total) {
    if (total == 0) return 0.0;
    double g = 1.0;
    for (int c : counts) {
        const double p = static_cast<double>(c) / total;
        g -= p * p;
    }
    return g;
}

}  // namespace

std::vector<double> mutual_information(const AggregatedDataset& data, int bins) {
    if (bins < 2) throw std::invalid_argument("mutual_information: bins must be >= 2");
    if (data.m() == 0) throw std::invalid_argument("mutual_information: empty dataset");
    const int m = data.m(), d = data.d(), C = data.n_classes;

    std::vector<double> label_p(C, 0.0);
    for (int y : data.y) label_p[y] += 1.0;
    for (double& p : label_p) p /= m;

    std::vector<double> scores(d, 0.0);
    std::vector<double> col(m);
    for (int j = 0; j < d; ++j) {
        for (int i = 0; i < m; ++i) col[i] = data.X.at(i, j);
        const std::vector<double> edges = bin_edges(col, bins);
        std::vector<std::vector<double>> joint(bins, std::vector<double>(C, 0.0));
        std::vector<double> bin_p(bins, 0.0);
        for (int i = 0; i < m; ++i) {
            const int b = assign_bin(col[i], edges);
            joint[b][data.y[i]] += 1.0;
            bin_p[b] += 1.0;
        }
        double mi = 0.0;
        for (int b = 0; b < bins; ++b) {
            if (bin_p[b] == 0.0) continue;
            for (int c = 0; c < C; ++c) {
                const double pbc = joint[b][c] / m;
                if (pbc == 0.0) continue;
                mi += pbc * std::log(pbc / ((bin_p[b] / m) * label_p[c]));
            }
        }
        scores[j] = std::max(mi, 0.0);  // clip the tiny negative round-off
    }
    const double total = std::accumulate(scores.begin(), scores.end(), 0.0);
    if (total > 0.0)
        for (double& s : scores) s /= total;
    return scores;
}

LrModel fit_logreg(const Tensor2& X, const std::vector<int>& y, int n_classes, double lambda,
                   int max_iters) {
    const int m = X.rows, d = X.cols, C = n_classes;
    if (m == 0 || static_cast<std::size_t>(m) != y.size())
        throw std::invalid_argument("fit_logreg: bad shapes");

    LrModel model;
    model.mean.assign(d, 0.0);
    model.stdev.assign(d, 1.0);
    for (int j = 0; j < d; ++j) {
        double s = 0.0;
        for (int i = 0; i < m; ++i) s += X.at(i, j);
        model.mean[j] = s / m;
        double sq = 0.0;
        for (int i = 0; i < m; ++i) {
            const double c = X.at(i, j) - model.mean[j];
            sq += c * c;
        }
        const double sd = std::sqrt(sq / m);
        model.stdev[j] = sd > 0.0 ? sd : 1.0;
    }
    Tensor2 Z(m, d);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < d; ++j) Z.at(i, j) = (X.at(i, j) - model.mean[j]) / model.stdev[j];

    model.W = Tensor2(d, C);
    model.b = Tensor2(1, C);

    Tensor2 P(m, C);
    auto objective = [&](const Tensor2& W, const Tensor2& b, Tensor2* probs) {
        double nll = 0.0;
        for (int i = 0; i < m; ++i) {
            std::vector<double> logits(C);
            for (int c = 0; c < C; ++c) logits[c] = b.data[c];
            for (int j = 0; j < d; ++j) {
                const double z = Z.at(i, j);
                if (z != 0.0)
                    for (int c = 0; c < C; ++c) logits[c] += z * W.at(j, c);
            }
            const double mx = *std::max_element(logits.begin(), logits.end());
            double sum = 0.0;
            for (int c = 0; c < C; ++c) sum += std::exp(logits[c] - mx);
            const double lse = mx + std::log(sum);
            nll -= logits[y[i]] - lse;
            if (probs)
                for (int c = 0; c < C; ++c) probs->at(i, c) = std::exp(logits[c] - lse);
        }
        double reg = 0.0;
        for (double w : W.data) reg += w * w;
        return nll / m + 0.5 * lambda * reg;
    };

    double obj = objective(model.W, model.b, &P);
    double lr = 0.5;
    int iter = 0;
    for (; iter < max_iters; ++iter) {
        // Gradients from the probabilities of the current point.
        Tensor2 gW(d, C), gb(1, C);
        for (int i = 0; i < m; ++i) {
            for (int c = 0; c < C; ++c) {
                const double g = (P.at(i, c) - (y[i] == c ? 1.0 : 0.0)) / m;
                gb.data[c] += g;
                for (int j = 0; j < d; ++j) gW.at(j, c) += g * Z.at(i, j);
            }
        }
        for (std::size_t k = 0; k < gW.size(); ++k) gW.data[k] += lambda * model.W.data[k];

        bool stepped = false;
        while (lr >= 1e-12) {
            Tensor2 W2 = model.W, b2 = model.b;
            kernels::axpy(-lr, gW.data.data(), W2.data.data(), W2.size());
            kernels::axpy(-lr, gb.data.data(), b2.data.data(), b2.size());
            Tensor2 P2(m, C);
            const double obj2 = objective(W2, b2, &P2);
            if (obj2 <= obj) {
                const double gain = obj - obj2;
                model.W = std::move(W2);
                model.b = std::move(b2);
                P = std::move(P2);
                obj = obj2;
                stepped = true;
                if (gain < 1e-10 * std::max(1.0, std::abs(obj))) iter = max_iters - 1;  // converged
                break;
            }
            lr *= 0.5;
        }
        if (!stepped) break;  // no descent direction at any step size
    }
    model.iterations = iter;
    model.converged = iter < max_iters;
    return model;
}

int predict_logreg(const LrModel& m, const double* x_row, int d) {
    const int C = m.W.cols;
    std::vector<double> logits(m.b.data);
    for (int j = 0; j < d; ++j) {
        const double z = (x_row[j] - m.mean[j]) / m.stdev[j];
        for (int c = 0; c < C; ++c) logits[c] += z * m.W.at(j, c);
    }
    int arg = 0;
    for (int c = 1; c < C; ++c)
        if (logits[c] > logits[arg]) arg = c;
    return arg;
}

std::vector<int> rfe_rank(const AggregatedDataset& data) {
    const int d = data.d();
    if (data.m() <= d)
        throw InputError("rfe_rank: need more samples than features (" +
                         std::to_string(data.m()) + " <= " + std::to_string(d) + ")");
    std::vector<int> active(d);
    std::iota(active.begin(), active.end(), 0);
    std::vector<int> ranks(d, 0);
    int next_rank = d;

    while (active.size() > 1) {
        const int da = static_cast<int>(active.size());
        Tensor2 Xs(data.m(), da);
        for (int i = 0; i < data.m(); ++i)
            for (int j = 0; j < da; ++j) Xs.at(i, j) = data.X.at(i, active[j]);
        LrModel lr = fit_logreg(Xs, data.y, data.n_classes);

        int drop = 0;
        double drop_norm = -1.0;
        for (int j = 0; j < da; ++j) {
            const double norm =
                kernels::dot(lr.W.row(j), lr.W.row(j), static_cast<std::size_t>(lr.W.cols));
            if (drop_norm < 0.0 || norm <= drop_norm) {  // ties: the later index goes first
                drop_norm = norm;
                drop = j;
            }
        }
        ranks[active[drop]] = next_rank--;
        active.erase(active.begin() + drop);
    }
    ranks[active[0]] = 1;
    return ranks;
}

namespace {

struct TreeBuilder {
    const AggregatedDataset& data;
    const std::vector<int>& boot;  // bootstrap sample (indices into data)
    Rng& rng;
    std::vector<double>& importance;
    int mtry;
    int min_leaf = 2;

    void grow(std::vector<int> idx, double node_gini, const std::vector<int>& node_counts) {
        const int n = static_cast<int>(idx.size());
        if (n < 2 * min_leaf || node_gini == 0.0) return;

        // Candidate features: partial Fisher-Yates over the schema.
        const int d = data.d();
        std::vector<int> feats(d);
        std::iota(feats.begin(), feats.end(), 0);
        for (int j = 0; j < mtry; ++j) {
            const int pick = j + static_cast<int>(rng.below(static_cast<std::uint64_t>(d - j)));
            std::swap(feats[j], feats[pick]);
        }

        int best_f = -1;
        double best_thr = 0.0, best_decrease = 0.0;
        const int C = data.n_classes;
        std::vector<std::pair<double, int>> vals(n);
        for (int cand = 0; cand < mtry; ++cand) {
            const int f = feats[cand];
            for (int i = 0; i < n; ++i)
                vals[i] = {data.X.at(boot[idx[i]], f), data.y[boot[idx[i]]]};
            std::sort(vals.begin(), vals.end());
            std::vector<int> left(C, 0);
            int nl = 0;
            for (int i = 0; i + 1 < n; ++i) {
                ++left[vals[i].second];
                ++nl;
                if (vals[i].first == vals[i + 1].first) continue;  // not a boundary
                const int nr = n - nl;
                if (nl < min_leaf || nr < min_leaf) continue;
                std::vector<int> right(C);
                for (int c = 0; c < C; ++c) right[c] = node_counts[c] - left[c];
                const double w =
                    node_gini - (nl * gini(left, nl) + nr * gini(right, nr)) / n;
                if (w > best_decrease) {
                    best_decrease = w;
                    best_f = f;
                    best_thr = 0.5 * (vals[i].first + vals[i + 1].first);
                }
            }
        }
        if (best_f < 0) return;

        importance[best_f] +=
            (static_cast<double>(n) / static_cast<double>(boot.size())) * best_decrease;

        std::vector<int> li, ri;
        std::vector<int> lc(C, 0), rc(C, 0);
        for (int i : idx) {
            if (data.X.at(boot[i], best_f) <= best_thr) {
                li.push_back(i);
                ++lc[data.y[boot[i]]];
            } else {
                ri.push_back(i);
                ++rc[data.y[boot[i]]];
            }
        }
        const int nl2 = static_cast<int>(li.size());
        const int nr2 = static_cast<int>(ri.size());
        grow(std::move(li), gini(lc, nl2), lc);
        grow(std::move(ri), gini(rc, nr2), rc);
    }
};

}  // namespace

std::vector<double> rf_importance(const AggregatedDataset& data, int trees, std::uint64_t seed) {
    if (trees < 1) throw std::invalid_argument("rf_importance: trees must be >= 1");
    const int d = data.d(), m = data.m(), C = data.n_classes;
    std::vector<double> importance(d, 0.0);
    const int mtry = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(d))));

    for (int t = 0; t < trees; ++t) {
        Rng rng(mix_seed(seed, {"tree", static_cast<std::uint64_t>(t)}));
        std::vector<int> boot(m);
        for (int i = 0; i < m; ++i)
            boot[i] = static_cast<int>(rng.below(static_cast<std::uint64_t>(m)));
        std::vector<int> counts(C, 0);
        for (int i : boot) ++counts[data.y[i]];
        std::vector<int> idx(m);
        std::iota(idx.begin(), idx.end(), 0);
        TreeBuilder builder{data, boot, rng, importance, mtry};
        builder.grow(std::move(idx), gini(counts, m), counts);
    }
    for (double& v : importance) v /= trees;
    const double total = std::accumulate(importance.begin(), importance.end(), 0.0);
    if (total > 0.0)
        for (double& v : importance) v /= total;
    return importance;
}

namespace {

std::vector<int> ordered_take(const std::vector<double>& key, int k, bool descending) {
    const int d = static_cast<int>(key.size());
    if (k < 1 || k > d)
        throw InputError("top_k: k=" + std::to_string(k) + " outside 1.." + std::to_string(d));
    std::vector<int> idx(d);
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) {
        return descending ? key[a] > key[b] : key[a] < key[b];
    });
    idx.resize(k);
    return idx;
}

}  // namespace

std::vector<int> top_k(const std::vector<double>& scores, int k) {
    return ordered_take(scores, k, true);
}

std::vector<int> top_k_ranks(const std::vector<int>& ranks, int k) {
    std::vector<double> key(ranks.begin(), ranks.end());
    return ordered_take(key, k, false);
}

std::vector<int> bottom_k(const std::vector<double>& scores, int k) {
    return ordered_take(scores, k, false);
}

}  // namespace cogbridge
