#pragma once
// Per-sentence gradient training with mini-batch accumulation, Adam, and
// early stopping on a validation carve-out of the training items.

#include <cstdint>
#include <vector>

#include "cogbridge/model.hpp"
#include "cogbridge/optim.hpp"

namespace cogbridge {

struct Example {
    SignalMatrix x;
    int label = -1;              // classification gold
    std::vector<int> label_seq;  // sequence gold (length x.n)
};

struct TrainConfig {
    AdamConfig adam;             // lr 1e-3, betas, eps, clip 5.0
    int batch_size = 32;         // gradients averaged over the batch
    int max_epochs = 50;
    int patience = 10;           // epochs without a new best validation F1
    double val_fraction = 0.15;  // carved deterministically from the train items
};

struct TrainResult {
    int best_epoch = 0;       // 1-based; 0 = never improved over -inf (impossible)
    double best_val_f1 = 0.0;
    int epochs_run = 0;
};

// Initializes the model from m.cfg.seed, trains on `items` minus a
// validation carve-out, and leaves the best-validation-epoch weights in
// the model.
TrainResult train_model(BridgeModel& m, const std::vector<Example>& items,
                        const TrainConfig& tc);

// Predictions for every item (classification: one label; sequence: flattened
// tokens), paired with the golds in the same order.
void collect_predictions(BridgeModel& m, const std::vector<Example>& items,
                         std::vector<int>& preds, std::vector<int>& golds);

double evaluate_macro_f1(BridgeModel& m, const std::vector<Example>& items);

}  // namespace cogbridge
