#pragma once
// The four-layer bridging network: feature-level attention over the signal
// columns, an optional Bi-LSTM encoder over the true-length rows, and either
// a max-pool + softmax classification head or a linear-chain CRF tagging
// head. Sentence graphs are built per example on the autodiff tape.

#include <cstdint>
#include <string>
#include <vector>

#include "cogbridge/corpus.hpp"
#include "cogbridge/graph.hpp"
#include "cogbridge/optim.hpp"
#include "cogbridge/tasks.hpp"

namespace cogbridge {

struct ModelConfig {
    SignalType signal = SignalType::Eye;
    std::string task;
    int hidden = 20;
    bool use_attention = true;  // false: plain Bi-LSTM classifier (selection baselines)
    bool use_encoder = true;
    bool focal = false;  // focal loss (Tense/SubjNum/ObjNum default); else cross-entropy
    double focal_gamma = 2.0;
    std::uint64_t seed = 0;
};

struct BridgeModel {
    ModelConfig cfg;
    TaskKind kind = TaskKind::ThreeClass;
    int d = 0;         // signal dimension
    int n_max = 0;     // padded sentence length; second dim of W_att
    int n_labels = 0;  // classes (softmax head) or tags (CRF head)

    // Attention: alpha = softmax(tanh(W_att * H + b_att) * v).
    Tensor2 W_att, b_att, v_att;
    // Encoder, per direction: combined gate weights [i f g o] and bias.
    Tensor2 W_fwd, b_fwd, W_bwd, b_bwd;
    // CRF head (sequence tasks): emissions o = H' W_s + b_s; transitions T
    // indexed (previous tag, current tag) with the START row last.
    Tensor2 W_s, b_s, T;
    // Softmax head (everything else).
    Tensor2 W_p, b_p;

    // Gradient buffers, parallel to the tensors above.
    Tensor2 gW_att, gb_att, gv_att, gW_fwd, gb_fwd, gW_bwd, gb_bwd, gW_s, gb_s, gT, gW_p, gb_p;

    int enc_out() const { return cfg.use_encoder ? 2 * cfg.hidden : d; }
    // Name/value/grad triples for every tensor this configuration trains.
    std::vector<ParamRef> params();
};

// Allocates (does not initialize) all parameters for the configuration.
BridgeModel make_model(const ModelConfig& cfg, TaskKind kind, int d, int n_max, int n_labels);

struct BuiltGraph {
    Graph g;
    std::vector<Graph::NodeId> param_ids;  // parallel to BridgeModel::params()
    Graph::NodeId alpha = -1;              // 1 x d
    Graph::NodeId h_prime = -1;            // n x enc_out
    Graph::NodeId emissions = -1;          // n x n_labels (sequence models)
    Graph::NodeId probs = -1;              // 1 x n_labels (classification models)
    Graph::NodeId loss = -1;               // 1 x 1 when a gold label was supplied
};

// Forward-only graph: attention, encoder, and the head outputs.
BuiltGraph build_graph(BridgeModel& m, const SignalMatrix& x);

// Classification loss: -weight * (1 - p_gold)^gamma * log(p_gold + 1e-12).
// gamma = 0, weight = 1 is cross-entropy.
BuiltGraph build_loss_graph(BridgeModel& m, const SignalMatrix& x, int gold, double gamma,
                            double weight);

// CRF negative log-likelihood: logZ (forward algorithm) - score(gold).
BuiltGraph build_crf_loss_graph(BridgeModel& m, const SignalMatrix& x,
                                const std::vector<int>& gold_tags);

// Highest-scoring tag path; ties at every comparison go to the lowest tag id.
std::vector<int> viterbi(const Tensor2& emissions, const Tensor2& T);

// Inference conveniences (run forward on a fresh graph).
std::vector<double> attention_alpha(BridgeModel& m, const SignalMatrix& x);
int predict_label(BridgeModel& m, const SignalMatrix& x);        // argmax, ties to lowest id
std::vector<int> predict_tags(BridgeModel& m, const SignalMatrix& x);

// Inverse training-frequency class weights, renormalized to mean 1; classes
// absent from the split fall back to weight of a single pseudo-count.
std::vector<double> focal_class_weights(const std::vector<int>& train_labels, int n_classes);

// JSON checkpoint: config, shapes, every named parameter, and the
// normalization fingerprint of the split the model was trained on.
void save_checkpoint(const std::string& path, const BridgeModel& m,
                     std::uint64_t norm_fingerprint);
std::pair<BridgeModel, std::uint64_t> load_checkpoint(const std::string& path);

}  // namespace cogbridge
