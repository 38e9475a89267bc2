#pragma once

#include <cstdint>
#include <vector>

#include "seglab/unet.hpp"

namespace seglab {

struct AdamConfig {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

struct AdamState {
    int64_t step = 0;
    std::vector<std::vector<double>> m;  // first moments, one vector per parameter tensor
    std::vector<std::vector<double>> v;  // second moments
};

// Bias-corrected Adam update, applied in place. State is lazily initialized to
// zero moments on the first call. Non-finite gradients are rejected.
void adam_step(ModelParams& params, const std::vector<NamedTensor>& grads, AdamState& state,
               const AdamConfig& config);

}  // namespace seglab
