#include "cogbridge/train.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "cogbridge/kernels.hpp"
#include "cogbridge/metrics.hpp"
#include "cogbridge/rng.hpp"

namespace cogbridge {

namespace {

void check_items(const BridgeModel& m, const std::vector<Example>& items) {
    for (const Example& ex : items) {
        if (m.kind == TaskKind::Sequence) {
            if (static_cast<int>(ex.label_seq.size()) != ex.x.n)
                throw std::invalid_argument("train: sequence gold length mismatch");
        } else if (ex.label < 0 || ex.label >= m.n_labels) {
            throw std::invalid_argument("train: label " + std::to_string(ex.label) +
                                        " outside 0.." + std::to_string(m.n_labels - 1));
        }
    }
}

}  // namespace

void collect_predictions(BridgeModel& m, const std::vector<Example>& items,
                         std::vector<int>& preds, std::vector<int>& golds) {
    for (const Example& ex : items) {
        if (m.kind == TaskKind::Sequence) {
            std::vector<int> tags = predict_tags(m, ex.x);
            preds.insert(preds.end(), tags.begin(), tags.end());
            golds.insert(golds.end(), ex.label_seq.begin(), ex.label_seq.end());
        } else {
            preds.push_back(predict_label(m, ex.x));
            golds.push_back(ex.label);
        }
    }
}

double evaluate_macro_f1(BridgeModel& m, const std::vector<Example>& items) {
    std::vector<int> preds, golds;
    collect_predictions(m, items, preds, golds);
    return macro_f1(preds, golds, m.n_labels);
}

TrainResult train_model(BridgeModel& m, const std::vector<Example>& items,
                        const TrainConfig& tc) {
    if (items.empty()) throw std::invalid_argument("train: no items");
    check_items(m, items);

    std::vector<ParamRef> params = m.params();
    init_params(params, m.cfg.seed);
    AdamState state(params);

    // Deterministic validation carve-out.
    const int n = static_cast<int>(items.size());
    std::vector<int> order(n);
    for (int i = 0; i < n; ++i) order[i] = i;
    Rng carve_rng(mix_seed(m.cfg.seed, {"val-split"}));
    carve_rng.shuffle(order);
    int n_val = 0;
    if (n >= 2)
        n_val = std::clamp(static_cast<int>(std::llround(tc.val_fraction * n)), 1, n - 1);
    std::vector<const Example*> val, train;
    for (int i = 0; i < n_val; ++i) val.push_back(&items[order[i]]);
    for (int i = n_val; i < n; ++i) train.push_back(&items[order[i]]);
    if (val.empty()) val = train;  // single-item degenerate case

    // Focal loss setup: inverse-frequency class weights from the items the
    // gradient actually sees.
    double gamma = 0.0;
    std::vector<double> weights(std::max(m.n_labels, 1), 1.0);
    if (m.cfg.focal && m.kind != TaskKind::Sequence) {
        gamma = m.cfg.focal_gamma;
        std::vector<int> train_labels;
        for (const Example* ex : train) train_labels.push_back(ex->label);
        weights = focal_class_weights(train_labels, m.n_labels);
    }

    Rng shuffle_rng(mix_seed(m.cfg.seed, {"train-shuffle"}));
    std::vector<int> train_order(train.size());
    for (std::size_t i = 0; i < train.size(); ++i) train_order[i] = static_cast<int>(i);

    TrainResult result;
    double best = -1.0;
    std::vector<Tensor2> best_weights;
    int bad_epochs = 0;

    auto snapshot = [&]() {
        best_weights.clear();
        for (const ParamRef& p : params) best_weights.push_back(*p.value);
    };

    for (int epoch = 1; epoch <= tc.max_epochs; ++epoch) {
        shuffle_rng.shuffle(train_order);
        std::size_t cursor = 0;
        while (cursor < train_order.size()) {
            const std::size_t stop =
                std::min(cursor + static_cast<std::size_t>(tc.batch_size), train_order.size());
            zero_grads(params);
            const double inv = 1.0 / static_cast<double>(stop - cursor);
            for (; cursor < stop; ++cursor) {
                const Example& ex = *train[train_order[cursor]];
                BuiltGraph bg =
                    m.kind == TaskKind::Sequence
                        ? build_crf_loss_graph(m, ex.x, ex.label_seq)
                        : build_loss_graph(m, ex.x, ex.label, gamma, weights[ex.label]);
                bg.g.forward();
                bg.g.backward(bg.loss);
                for (std::size_t k = 0; k < params.size(); ++k) {
                    const Tensor2& g = bg.g.grad(bg.param_ids[k]);
                    kernels::axpy(1.0, g.data.data(), params[k].grad->data.data(), g.size());
                }
            }
            for (const ParamRef& p : params)
                kernels::scale(p.grad->data.data(), inv, p.grad->data.data(), p.grad->size());
            adam_step(params, state, tc.adam);
        }

        std::vector<int> preds, golds;
        for (const Example* ex : val) {
            if (m.kind == TaskKind::Sequence) {
                std::vector<int> tags = predict_tags(m, ex->x);
                preds.insert(preds.end(), tags.begin(), tags.end());
                golds.insert(golds.end(), ex->label_seq.begin(), ex->label_seq.end());
            } else {
                preds.push_back(predict_label(m, ex->x));
                golds.push_back(ex->label);
            }
        }
        const double val_f1 = macro_f1(preds, golds, m.n_labels);
        result.epochs_run = epoch;
        if (val_f1 > best) {
            best = val_f1;
            result.best_epoch = epoch;
            result.best_val_f1 = val_f1;
            snapshot();
            bad_epochs = 0;
        } else if (++bad_epochs >= tc.patience) {
            break;
        }
    }

    if (!best_weights.empty())
        for (std::size_t k = 0; k < params.size(); ++k) *params[k].value = best_weights[k];
    return result;
}

}  // namespace cogbridge
