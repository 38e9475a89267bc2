#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "seglab/ops.hpp"
#include "seglab/tensor.hpp"

namespace seglab {

// Compact encoder-decoder. levels encoder convs (base<<i channels), one
// bottleneck conv (base<<levels), decoder convs fed by nearest upsampling plus
// skip concatenation, and a final 1x1 conv to num_classes.
struct UNetDescriptor {
    int in_channels = 1;
    int levels = 2;
    int base_channels = 8;
    int num_classes = 4;

    void validate() const;
};

struct ModelParams {
    UNetDescriptor desc;
    std::vector<NamedTensor> tensors;  // fixed order: enc0..encL-1, bottleneck, decL-1..dec0, head

    Tensor& find(const std::string& name);
    const Tensor& find(const std::string& name) const;
    size_t num_scalars() const;
};

// Deterministic He-normal initialization (std = sqrt(2/fan_in)), zero biases.
ModelParams init_model(const UNetDescriptor& desc, uint64_t seed);

// Activation cache recorded by a forward pass; required input of unet_backward.
struct ForwardTrace {
    std::vector<Tensor> conv_in;        // input seen by each conv, in layer order
    std::vector<Tensor> pre_relu;       // pre-activation of each relu conv
    std::vector<std::vector<int>> pool_argmax;
    std::vector<std::vector<int>> pool_in_shape;
    bool recorded = false;
};

// Forward pass. H and W must be divisible by 2^levels. If trace is non-null
// the activations needed by unet_backward are cached there.
Tensor unet_forward(const ModelParams& params, const Tensor& image, ForwardTrace* trace = nullptr);

// Reverse pass seeded with d(loss)/d(logits); requires a recorded trace.
GradientBundle unet_backward(const ModelParams& params, const ForwardTrace& trace,
                             const Tensor& logit_grad);

}  // namespace seglab
