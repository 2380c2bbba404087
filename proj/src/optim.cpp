#include "cogbridge/optim.hpp"

#include <cmath>
#include <stdexcept>

#include "cogbridge/kernels.hpp"
#include "cogbridge/rng.hpp"

namespace cogbridge {

AdamState::AdamState(const std::vector<ParamRef>& params) {
    m.reserve(params.size());
    v.reserve(params.size());
    for (const ParamRef& p : params) {
        m.emplace_back(p.value->rows, p.value->cols);
        v.emplace_back(p.value->rows, p.value->cols);
    }
}

void AdamState::reset() {
    for (Tensor2& x : m) x.fill(0.0);
    for (Tensor2& x : v) x.fill(0.0);
    t = 0;
}

void init_params(const std::vector<ParamRef>& params, std::uint64_t seed) {
    for (const ParamRef& p : params) {
        Rng rng(mix_seed(seed, {"init", p.name}));
        const double bound = std::sqrt(6.0 / (p.value->rows + p.value->cols));
        for (double& x : p.value->data) x = rng.uniform(-bound, bound);
        if (p.grad) p.grad->fill(0.0);
    }
}

void zero_grads(const std::vector<ParamRef>& params) {
    for (const ParamRef& p : params) p.grad->fill(0.0);
}

double global_grad_norm(const std::vector<ParamRef>& params) {
    double sq = 0.0;
    for (const ParamRef& p : params)
        sq += kernels::dot(p.grad->data.data(), p.grad->data.data(), p.grad->size());
    return std::sqrt(sq);
}

void adam_step(const std::vector<ParamRef>& params, AdamState& state, const AdamConfig& cfg) {
    if (state.m.size() != params.size())
        throw std::invalid_argument("adam_step: state built for " + std::to_string(state.m.size()) +
                                    " parameters, got " + std::to_string(params.size()));
    for (const ParamRef& p : params)
        if (!all_finite(*p.grad))
            throw std::runtime_error("adam_step: non-finite gradient for " + p.name);

    const double norm = global_grad_norm(params);
    if (norm > cfg.clip_norm && norm > 0.0) {
        const double s = cfg.clip_norm / norm;
        for (const ParamRef& p : params)
            kernels::scale(p.grad->data.data(), s, p.grad->data.data(), p.grad->size());
    }

    state.t += 1;
    const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.t));
    const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.t));
    for (std::size_t k = 0; k < params.size(); ++k) {
        Tensor2& val = *params[k].value;
        const Tensor2& g = *params[k].grad;
        Tensor2& m = state.m[k];
        Tensor2& v = state.v[k];
        for (std::size_t i = 0; i < val.size(); ++i) {
            const double gi = g.data[i];
            m.data[i] = cfg.beta1 * m.data[i] + (1.0 - cfg.beta1) * gi;
            v.data[i] = cfg.beta2 * v.data[i] + (1.0 - cfg.beta2) * gi * gi;
            const double mhat = m.data[i] / bc1;
            const double vhat = v.data[i] / bc2;
            val.data[i] -= cfg.lr * mhat / (std::sqrt(vhat) + cfg.eps);
        }
    }
}

}  // namespace cogbridge
