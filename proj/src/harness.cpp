#include "cogbridge/harness.hpp"

#include <algorithm>
#include <atomic>
#include <map>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "cogbridge/rng.hpp"

namespace cogbridge {

namespace {

bool focal_by_default(const std::string& task) {
    return task == "Tense" || task == "SubjNum" || task == "ObjNum";
}

std::vector<std::string> ids_outside_fold(const Corpus& corpus, const std::vector<int>& fold_of,
                                          int fold) {
    std::vector<std::string> ids;
    for (int r = 0; r < corpus.size(); ++r)
        if (fold_of[static_cast<std::size_t>(r)] != fold) ids.push_back(corpus.records[r].id);
    return ids;
}

// The training split's ids must be exactly what the stats were fitted on.
void assert_no_leakage(const Corpus& normalized, std::vector<std::string> fit_ids) {
    const std::uint64_t expect = fingerprint_ids(std::move(fit_ids));
    for (SignalType t : {SignalType::Eye, SignalType::Eeg})
        if (normalized.stats(t).fit_fingerprint != expect)
            throw std::logic_error("normalization fingerprint mismatch: test-fold statistics "
                                   "reached training");
}

void zero_column(std::vector<Example>& items, int col) {
    for (Example& e : items)
        for (int i = 0; i < e.x.H.rows; ++i) e.x.H.at(i, col) = 0.0;
}

std::string selection_key(const std::string& classifier, std::vector<int> selected) {
    std::sort(selected.begin(), selected.end());
    std::string key = classifier;
    for (int s : selected) key += ":" + std::to_string(s);
    return key;
}

}  // namespace

ModelConfig default_model_config(const std::string& task) {
    ModelConfig cfg;
    cfg.task = task;
    cfg.focal = focal_by_default(task);
    return cfg;
}

std::vector<Example> make_examples(const Corpus& normalized, const TaskData& data,
                                   SignalType signal, int n_max,
                                   const std::vector<int>& keep_cols) {
    const int d_full = SignalSchema::of(signal).d();
    for (int c : keep_cols)
        if (c < 0 || c >= d_full)
            throw std::invalid_argument("make_examples: column " + std::to_string(c) +
                                        " outside 0.." + std::to_string(d_full - 1));
    std::vector<Example> out;
    out.reserve(data.items.size());
    for (const TaskItem& item : data.items) {
        SignalMatrix sm = pad(normalized.records[static_cast<std::size_t>(item.record_index)],
                              n_max, signal);
        if (!keep_cols.empty()) {
            Tensor2 restricted(n_max, static_cast<int>(keep_cols.size()));
            for (int i = 0; i < n_max; ++i)
                for (std::size_t j = 0; j < keep_cols.size(); ++j)
                    restricted.at(i, static_cast<int>(j)) = sm.H.at(i, keep_cols[j]);
            sm.H = std::move(restricted);
        }
        if (item.bshift_swap >= 0) {
            double* a = sm.H.row(item.bshift_swap);
            double* b = sm.H.row(item.bshift_swap + 1);
            std::swap_ranges(a, a + sm.H.cols, b);
        }
        Example e;
        e.x = std::move(sm);
        e.label = item.label;
        e.label_seq = item.label_seq;
        out.push_back(std::move(e));
    }
    return out;
}

CvResult run_cv(const Corpus& corpus, const Resources& res, const ExperimentConfig& config) {
    const TaskSpec& spec = TaskSpec::by_name(config.task);
    if (config.k_folds < 2) throw InputError("run_cv: k-folds must be >= 2");
    const int d = SignalSchema::of(config.signal).d();

    CvResult cv;
    cv.config = config;
    cv.kind = spec.kind;
    cv.d = d;
    cv.n_max = corpus.n_max();
    cv.fold_of = make_folds(corpus, config.k_folds, config.seed);
    cv.folds.resize(static_cast<std::size_t>(config.k_folds));
    cv.models.resize(static_cast<std::size_t>(config.k_folds));
    cv.fingerprints.assign(static_cast<std::size_t>(config.k_folds), 0);
    cv.train_sets.resize(static_cast<std::size_t>(config.k_folds));
    cv.test_sets.resize(static_cast<std::size_t>(config.k_folds));

    // Per-fold alpha sums, merged after all folds finish so the result is
    // independent of fold execution order.
    std::vector<std::vector<double>> alpha_sum(static_cast<std::size_t>(config.k_folds));
    std::vector<int> alpha_count(static_cast<std::size_t>(config.k_folds), 0);
    std::vector<std::vector<std::string>> fold_vocab(static_cast<std::size_t>(config.k_folds));

    auto run_fold = [&](int f) {
        std::vector<std::string> fit_ids = ids_outside_fold(corpus, cv.fold_of, f);
        Corpus normalized = normalize(corpus, fit_ids);
        assert_no_leakage(normalized, fit_ids);
        const std::uint64_t fp = normalized.stats(config.signal).fit_fingerprint;

        TaskData data = build_task_fold(corpus, spec, res, cv.fold_of, f, config.seed);
        fold_vocab[static_cast<std::size_t>(f)] = data.label_vocab;
        cv.folds[static_cast<std::size_t>(f)].label_vocab = data.label_vocab;
        std::vector<Example> all = make_examples(normalized, data, config.signal, cv.n_max);
        std::vector<Example> train, test;
        for (std::size_t i = 0; i < all.size(); ++i)
            (data.item_fold[i] == f ? test : train).push_back(std::move(all[i]));

        FoldResult& fr = cv.folds[static_cast<std::size_t>(f)];
        fr.fold = f;
        fr.n_train = static_cast<int>(train.size());
        fr.n_test = static_cast<int>(test.size());
        cv.fingerprints[static_cast<std::size_t>(f)] = fp;

        if (train.empty()) {
            fr.flagged = true;
            fr.flag_reason = "no training items";
        } else if (test.empty()) {
            fr.flagged = true;
            fr.flag_reason = "no test items";
        } else if (spec.kind != TaskKind::Sequence) {
            std::vector<bool> seen(data.label_vocab.size(), false);
            for (const Example& e : train) seen[static_cast<std::size_t>(e.label)] = true;
            for (std::size_t c = 0; c < seen.size(); ++c)
                if (!seen[c]) {
                    fr.flagged = true;
                    fr.flag_reason = "label '" + data.label_vocab[c] +
                                     "' never appears in the training folds";
                    break;
                }
        }

        cv.train_sets[static_cast<std::size_t>(f)] = std::move(train);
        cv.test_sets[static_cast<std::size_t>(f)] = std::move(test);
        if (fr.flagged) return;

        ModelConfig mc = config.model;
        mc.signal = config.signal;
        mc.task = config.task;
        mc.seed = mix_seed(config.seed, {"fold", static_cast<std::uint64_t>(f)});
        BridgeModel model = make_model(mc, spec.kind, d, cv.n_max,
                                       static_cast<int>(data.label_vocab.size()));
        TrainResult tr = train_model(model, cv.train_sets[static_cast<std::size_t>(f)],
                                     config.train);
        fr.best_epoch = tr.best_epoch;

        std::vector<int> preds, golds;
        collect_predictions(model, cv.test_sets[static_cast<std::size_t>(f)], preds, golds);
        fr.report = score_classification(preds, golds, static_cast<int>(data.label_vocab.size()));
        fr.macro_f1 = fr.report.macro_f1;

        if (mc.use_attention) {
            std::vector<double>& sum = alpha_sum[static_cast<std::size_t>(f)];
            sum.assign(static_cast<std::size_t>(d), 0.0);
            for (const Example& e : cv.test_sets[static_cast<std::size_t>(f)]) {
                std::vector<double> a = attention_alpha(model, e.x);
                for (int j = 0; j < d; ++j) sum[static_cast<std::size_t>(j)] += a[j];
                ++alpha_count[static_cast<std::size_t>(f)];
            }
            fr.mean_alpha.assign(sum.begin(), sum.end());
            double total = 0.0;
            for (double v : fr.mean_alpha) total += v;
            if (total > 0.0)
                for (double& v : fr.mean_alpha) v /= total;
        }
        cv.models[static_cast<std::size_t>(f)] = std::move(model);
    };

    const int workers = std::min(std::max(config.jobs, 1), config.k_folds);
    if (workers <= 1) {
        for (int f = 0; f < config.k_folds; ++f) run_fold(f);
    } else {
        std::atomic<int> next{0};
        std::vector<std::exception_ptr> errors(static_cast<std::size_t>(config.k_folds));
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w)
            pool.emplace_back([&] {
                for (int f = next.fetch_add(1); f < config.k_folds; f = next.fetch_add(1)) {
                    try {
                        run_fold(f);
                    } catch (...) {
                        errors[static_cast<std::size_t>(f)] = std::current_exception();
                    }
                }
            });
        for (std::thread& t : pool) t.join();
        for (const std::exception_ptr& e : errors)
            if (e) std::rethrow_exception(e);
    }

    // The widest vocabulary wins (Tense folds all share one by construction;
    // POS vocabularies differ per fold and the union is not meaningful, so
    // reports use fold vocabularies for sequence tasks).
    for (const std::vector<std::string>& v : fold_vocab)
        if (v.size() > cv.label_vocab.size()) cv.label_vocab = v;

    double f1_total = 0.0;
    int used = 0;
    std::vector<double> agg(static_cast<std::size_t>(d), 0.0);
    int sentences = 0;
    for (int f = 0; f < config.k_folds; ++f) {
        const FoldResult& fr = cv.folds[static_cast<std::size_t>(f)];
        if (fr.flagged) continue;
        f1_total += fr.macro_f1;
        ++used;
        if (!alpha_sum[static_cast<std::size_t>(f)].empty()) {
            for (int j = 0; j < d; ++j)
                agg[static_cast<std::size_t>(j)] += alpha_sum[static_cast<std::size_t>(f)]
                                                             [static_cast<std::size_t>(j)];
            sentences += alpha_count[static_cast<std::size_t>(f)];
        }
    }
    cv.mean_f1 = used > 0 ? f1_total / used : 0.0;
    if (sentences > 0) {
        double total = 0.0;
        for (double v : agg) total += v;
        cv.attention_scores.resize(static_cast<std::size_t>(d));
        for (int j = 0; j < d; ++j)
            cv.attention_scores[static_cast<std::size_t>(j)] =
                agg[static_cast<std::size_t>(j)] / (total > 0.0 ? total : 1.0);
    }
    return cv;
}

MaskReport mask_eval(const CvResult& cv, const Corpus& corpus) {
    if (cv.attention_scores.empty())
        throw InputError("mask_eval: no attention scores (was the run made with attention?)");
    std::vector<int> live;
    for (int f = 0; f < cv.config.k_folds; ++f)
        if (!cv.folds[static_cast<std::size_t>(f)].flagged) live.push_back(f);
    if (live.empty()) throw InputError("mask_eval: every fold is flagged");

    // Re-derive each live fold's training ids and check the stored stats
    // fingerprint before trusting the frozen artifacts.
    for (int f : live) {
        const std::uint64_t expect = fingerprint_ids(ids_outside_fold(corpus, cv.fold_of, f));
        if (cv.fingerprints[static_cast<std::size_t>(f)] != expect)
            throw std::logic_error("mask_eval: fold " + std::to_string(f) +
                                   " fingerprint does not match its training split");
    }

    MaskReport report;
    report.order = top_k(cv.attention_scores, cv.d);

    double base = 0.0;
    for (int f : live) {
        BridgeModel m = *cv.models[static_cast<std::size_t>(f)];
        base += evaluate_macro_f1(m, cv.test_sets[static_cast<std::size_t>(f)]);
    }
    report.baseline_f1 = base / static_cast<double>(live.size());

    const TaskSpec& spec = TaskSpec::by_name(cv.config.task);
    for (int col : report.order) {
        double total = 0.0;
        for (int f : live) {
            std::vector<Example> test = cv.test_sets[static_cast<std::size_t>(f)];
            zero_column(test, col);
            if (!cv.config.mask_retrain) {
                BridgeModel m = *cv.models[static_cast<std::size_t>(f)];
                total += evaluate_macro_f1(m, test);
            } else {
                std::vector<Example> train = cv.train_sets[static_cast<std::size_t>(f)];
                zero_column(train, col);
                const BridgeModel& frozen = *cv.models[static_cast<std::size_t>(f)];
                BridgeModel m = make_model(frozen.cfg, spec.kind, frozen.d, frozen.n_max,
                                           frozen.n_labels);
                train_model(m, train, cv.config.train);
                total += evaluate_macro_f1(m, test);
            }
        }
        report.f1_after.push_back(total / static_cast<double>(live.size()));
    }
    return report;
}

FeatselGrid featsel_compare(const Corpus& corpus, const Resources& res,
                            const ExperimentConfig& config,
                            const std::vector<double>& attention_scores) {
    const TaskSpec& spec = TaskSpec::by_name(config.task);
    if (spec.kind == TaskKind::Sequence)
        throw InputError("featsel: task " + spec.name +
                         " has no per-sentence label; choose a classification task");
    if (config.k_folds < 2) throw InputError("featsel: k-folds must be >= 2");
    if (config.featsel_methods.empty()) throw InputError("featsel: no methods given");
    if (config.k_sweep.empty()) throw InputError("featsel: empty k sweep");
    const int d = SignalSchema::of(config.signal).d();
    for (int k : config.k_sweep)
        if (k < 1 || k > d)
            throw InputError("featsel: k = " + std::to_string(k) + " outside 1.." +
                             std::to_string(d));

    const std::vector<int> fold_of = make_folds(corpus, config.k_folds, config.seed);

    // Method scores come from the whole corpus (no held-out fold): binning
    // and model fits see every item.
    TaskData global = build_task_fold(corpus, spec, res, fold_of, -1, config.seed);
    AggregatedDataset agg_global = aggregate(corpus, global, config.signal);

    auto need_attention = [&](const std::string& method) {
        if (attention_scores.size() != static_cast<std::size_t>(d))
            throw InputError("featsel: method '" + method +
                             "' needs the attention scores of a prior run for this task and "
                             "signal type; run the experiment first");
    };

    // selected[method] = full descending preference order (length d).
    std::map<std::string, std::vector<int>> preference;
    for (const std::string& method : config.featsel_methods) {
        if (preference.count(method)) continue;
        if (method == "mi") {
            preference[method] = top_k(mutual_information(agg_global), d);
        } else if (method == "rf") {
            preference[method] =
                top_k(rf_importance(agg_global, 100, mix_seed(config.seed, {"rf"})), d);
        } else if (method == "rfe") {
            preference[method] = top_k_ranks(rfe_rank(agg_global), d);
        } else if (method == "attention") {
            need_attention(method);
            preference[method] = top_k(attention_scores, d);
        } else if (method == "attention_bottom") {
            need_attention(method);
            preference[method] = bottom_k(attention_scores, d);
        } else {
            throw InputError("featsel: unknown method '" + method +
                             "' (use attention, mi, rfe, rf, or attention_bottom)");
        }
    }

    // Per-fold task materializations and normalized corpora, shared by every
    // method x k cell.
    std::vector<TaskData> fold_data;
    std::vector<AggregatedDataset> fold_agg;
    std::vector<Corpus> fold_norm;
    for (int f = 0; f < config.k_folds; ++f) {
        fold_data.push_back(build_task_fold(corpus, spec, res, fold_of, f, config.seed));
        fold_agg.push_back(aggregate(corpus, fold_data.back(), config.signal));
        fold_norm.push_back(normalize(corpus, ids_outside_fold(corpus, fold_of, f)));
    }
    const int n_max = corpus.n_max();

    auto lr_eval = [&](const std::vector<int>& selected) {
        double total = 0.0;
        int used = 0;
        for (int f = 0; f < config.k_folds; ++f) {
            const AggregatedDataset& agg = fold_agg[static_cast<std::size_t>(f)];
            std::vector<int> train_rows, test_rows;
            for (int i = 0; i < agg.m(); ++i)
                (agg.item_fold[static_cast<std::size_t>(i)] == f ? test_rows : train_rows)
                    .push_back(i);
            std::vector<int> seen_labels(static_cast<std::size_t>(agg.n_classes), 0);
            for (int i : train_rows) ++seen_labels[static_cast<std::size_t>(agg.y[i])];
            int classes_present = 0;
            for (int c : seen_labels) classes_present += c > 0 ? 1 : 0;
            if (train_rows.empty() || test_rows.empty() || classes_present < 2) continue;

            const int k = static_cast<int>(selected.size());
            Tensor2 Xtr(static_cast<int>(train_rows.size()), k);
            std::vector<int> ytr;
            for (std::size_t i = 0; i < train_rows.size(); ++i) {
                for (int j = 0; j < k; ++j)
                    Xtr.at(static_cast<int>(i), j) = agg.X.at(train_rows[i], selected[j]);
                ytr.push_back(agg.y[train_rows[i]]);
            }
            LrModel lr = fit_logreg(Xtr, ytr, agg.n_classes);
            std::vector<int> preds, golds;
            std::vector<double> row(static_cast<std::size_t>(k));
            for (int i : test_rows) {
                for (int j = 0; j < k; ++j) row[static_cast<std::size_t>(j)] =
                    agg.X.at(i, selected[j]);
                preds.push_back(predict_logreg(lr, row.data(), k));
                golds.push_back(agg.y[i]);
            }
            total += macro_f1(preds, golds, agg.n_classes);
            ++used;
        }
        if (used == 0) throw InputError("featsel: every fold is degenerate for this task");
        return total / used;
    };

    auto lstm_eval = [&](const std::vector<int>& selected) {
        double total = 0.0;
        int used = 0;
        for (int f = 0; f < config.k_folds; ++f) {
            const TaskData& data = fold_data[static_cast<std::size_t>(f)];
            std::vector<Example> all = make_examples(fold_norm[static_cast<std::size_t>(f)],
                                                     data, config.signal, n_max, selected);
            std::vector<Example> train, test;
            for (std::size_t i = 0; i < all.size(); ++i)
                (data.item_fold[i] == f ? test : train).push_back(std::move(all[i]));
            std::vector<int> seen(data.label_vocab.size(), 0);
            for (const Example& e : train) ++seen[static_cast<std::size_t>(e.label)];
            int classes_present = 0;
            for (int c : seen) classes_present += c > 0 ? 1 : 0;
            if (train.empty() || test.empty() || classes_present < 2) continue;

            ModelConfig mc = config.model;
            mc.signal = config.signal;
            mc.task = config.task;
            mc.use_attention = false;
            mc.use_encoder = true;
            // Seed depends on the fold only, never on the method, so equal
            // feature sets give byte-equal results.
            mc.seed = mix_seed(config.seed, {"featsel-lstm", static_cast<std::uint64_t>(f)});
            BridgeModel m = make_model(mc, spec.kind, static_cast<int>(selected.size()), n_max,
                                       static_cast<int>(data.label_vocab.size()));
            train_model(m, train, config.train);
            total += evaluate_macro_f1(m, test);
            ++used;
        }
        if (used == 0) throw InputError("featsel: every fold is degenerate for this task");
        return total / used;
    };

    FeatselGrid grid;
    grid.methods = config.featsel_methods;
    grid.k_sweep = config.k_sweep;
    std::map<std::string, double> cache;
    for (const std::string& method : config.featsel_methods) {
        const std::vector<int>& order = preference[method];
        for (int k : config.k_sweep) {
            std::vector<int> selected(order.begin(), order.begin() + k);
            for (const char* classifier : {"lr", "lstm"}) {
                const std::string key = selection_key(classifier, selected);
                auto hit = cache.find(key);
                double f1;
                if (hit != cache.end()) {
                    f1 = hit->second;
                } else {
                    f1 = std::string(classifier) == "lr" ? lr_eval(selected)
                                                         : lstm_eval(selected);
                    cache.emplace(key, f1);
                }
                FeatselCell cell;
                cell.method = method;
                cell.k = k;
                cell.classifier = classifier;
                cell.mean_f1 = f1;
                cell.selected = selected;
                grid.cells.push_back(std::move(cell));
            }
        }
    }
    return grid;
}

}  // namespace cogbridge
