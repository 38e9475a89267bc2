#pragma once

#include <string>
#include <utility>
#include <vector>

#include "seglab/tensor.hpp"

namespace seglab {

struct NamedTensor {
    std::string name;
    Tensor t;
};

// Per-parameter gradients plus the gradient of the per-sample loss with
// respect to the pre-softmax logits (the "activation" used by the detector).
struct GradientBundle {
    std::vector<NamedTensor> param_grads;
    Tensor logit_grad;  // (num_classes, H, W)
};

// 2-D convolution, stride 1, zero 'same' padding. input (Cin,H,W),
// kernels (Cout,Cin,kh,kw) with odd kh/kw, bias length Cout. Output (Cout,H,W).
Tensor conv2d(const Tensor& input, const Tensor& kernels, const Tensor& bias);

// Gradients of conv2d. grad_out has the output shape; the three results are
// assigned (not accumulated).
void conv2d_backward(const Tensor& input, const Tensor& kernels, const Tensor& grad_out,
                     Tensor& grad_input, Tensor& grad_kernels, Tensor& grad_bias);

Tensor relu(const Tensor& x);
// pre is the pre-activation input that was fed to relu.
Tensor relu_backward(const Tensor& pre, const Tensor& grad_out);

// 2x2 max pooling, stride 2. H and W must be even. argmax (if non-null)
// receives, per output element, the flat input index of the winning pixel.
Tensor maxpool2(const Tensor& x, std::vector<int>* argmax = nullptr);
Tensor maxpool2_backward(const Tensor& grad_out, const std::vector<int>& argmax,
                         const std::vector<int>& input_shape);

// Nearest-neighbor 2x upsampling and its adjoint.
Tensor upsample2(const Tensor& x);
Tensor upsample2_backward(const Tensor& grad_out);

// Channel concatenation [a; b] and the split of a gradient back into parts.
Tensor concat_channels(const Tensor& a, const Tensor& b);
void concat_channels_backward(const Tensor& grad_out, int channels_a, Tensor& grad_a,
                              Tensor& grad_b);

// Per-pixel softmax over the channel axis of (C,H,W).
Tensor softmax_channels(const Tensor& logits);

struct CeResult {
    double loss = 0.0;        // mean over pixels of -log p(target)
    Tensor logit_grad;        // (softmax - one_hot) / num_pixels
    Tensor probs;             // softmax, kept for prediction snapshots
};

// Cross-entropy of per-pixel class logits against a class-index mask.
CeResult softmax_cross_entropy(const Tensor& logits, const Mask& target);

}  // namespace seglab
