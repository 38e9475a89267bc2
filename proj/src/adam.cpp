#include "seglab/adam.hpp"

#include <cmath>

#include "seglab/errors.hpp"

namespace seglab {

void adam_step(ModelParams& params, const std::vector<NamedTensor>& grads, AdamState& state,
               const AdamConfig& config) {
    if (grads.size() != params.tensors.size())
        throw DataError("adam_step: gradient count " + std::to_string(grads.size()) +
                        " != parameter count " + std::to_string(params.tensors.size()));
    if (state.m.empty()) {
        state.m.resize(params.tensors.size());
        state.v.resize(params.tensors.size());
        for (size_t i = 0; i < params.tensors.size(); ++i) {
            state.m[i].assign(params.tensors[i].t.size(), 0.0);
            state.v[i].assign(params.tensors[i].t.size(), 0.0);
        }
    }

    state.step += 1;
    const double bc1 = 1.0 - std::pow(config.beta1, static_cast<double>(state.step));
    const double bc2 = 1.0 - std::pow(config.beta2, static_cast<double>(state.step));

    for (size_t i = 0; i < params.tensors.size(); ++i) {
        Tensor& p = params.tensors[i].t;
        const Tensor& g = grads[i].t;
        if (g.shape != p.shape)
            throw DataError("adam_step: gradient shape mismatch for " + params.tensors[i].name +
                            ": " + g.shape_str() + " vs " + p.shape_str());
        auto& m = state.m[i];
        auto& v = state.v[i];
        for (size_t k = 0; k < p.size(); ++k) {
            const double gv = g.data[k];
            if (!std::isfinite(gv))
                throw NumericError("adam_step: non-finite gradient in " + params.tensors[i].name +
                                   " at index " + std::to_string(k));
            m[k] = config.beta1 * m[k] + (1.0 - config.beta1) * gv;
            v[k] = config.beta2 * v[k] + (1.0 - config.beta2) * gv * gv;
            const double mhat = m[k] / bc1;
            const double vhat = v[k] / bc2;
            p.data[k] = static_cast<float>(p.data[k] - config.lr * mhat / (std::sqrt(vhat) + config.eps));
        }
    }
}

}  // namespace seglab
