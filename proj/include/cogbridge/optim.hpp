#pragma once
// Adam with global-norm gradient clipping, plus parameter initialization.
//
// Models expose their trainable tensors as a flat list of named ParamRefs;
// every routine here walks that list in order. Gradients live in external
// buffers (filled by accumulating Graph::grad over a batch), so the same
// list drives initialization, clipping, stepping, and serialization.

#include <cstdint>
#include <string>
#include <vector>

#include "cogbridge/tensor.hpp"

namespace cogbridge {

struct ParamRef {
    std::string name;
    Tensor2* value = nullptr;
    Tensor2* grad = nullptr;
};

struct AdamConfig {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    double clip_norm = 5.0;
};

struct AdamState {
    std::vector<Tensor2> m;
    std::vector<Tensor2> v;
    std::int64_t t = 0;

    AdamState() = default;
    explicit AdamState(const std::vector<ParamRef>& params);
    void reset();
};

// Uniform +-sqrt(6 / (rows + cols)) per tensor; each tensor's stream is
// derived from (seed, "init", name) so adding a parameter elsewhere in the
// list never shifts the others.
void init_params(const std::vector<ParamRef>& params, std::uint64_t seed);

void zero_grads(const std::vector<ParamRef>& params);

// L2 norm over the concatenation of every gradient buffer.
double global_grad_norm(const std::vector<ParamRef>& params);

// One update. Rejects non-finite gradients (naming the parameter), then
// scales all gradients to clip_norm if their global norm exceeds it.
void adam_step(const std::vector<ParamRef>& params, AdamState& state, const AdamConfig& cfg);

}  // namespace cogbridge
