#include "seglab/unet.hpp"

#include <cmath>

#include "seglab/errors.hpp"
#include "seglab/rng.hpp"

namespace seglab {

void UNetDescriptor::validate() const {
    if (in_channels <= 0 || base_channels <= 0 || num_classes <= 0 || levels <= 0)
        throw ConfigError("model descriptor fields must be positive (in_channels=" +
                          std::to_string(in_channels) + ", levels=" + std::to_string(levels) +
                          ", base_channels=" + std::to_string(base_channels) +
                          ", num_classes=" + std::to_string(num_classes) + ")");
}

Tensor& ModelParams::find(const std::string& name) {
    for (auto& nt : tensors)
        if (nt.name == name) return nt.t;
    throw DataError("model parameter not found: " + name);
}

const Tensor& ModelParams::find(const std::string& name) const {
    for (const auto& nt : tensors)
        if (nt.name == name) return nt.t;
    throw DataError("model parameter not found: " + name);
}

size_t ModelParams::num_scalars() const {
    size_t n = 0;
    for (const auto& nt : tensors) n += nt.t.size();
    return n;
}

namespace {

struct LayerSpec {
    std::string name;
    int in_ch, out_ch, k;
};

std::vector<LayerSpec> layer_specs(const UNetDescriptor& d) {
    std::vector<LayerSpec> specs;
    for (int i = 0; i < d.levels; ++i) {
        const int in = (i == 0) ? d.in_channels : (d.base_channels << (i - 1));
        specs.push_back({"enc" + std::to_string(i), in, d.base_channels << i, 3});
    }
    specs.push_back({"bottleneck", d.base_channels << (d.levels - 1), d.base_channels << d.levels, 3});
    for (int i = d.levels - 1; i >= 0; --i) {
        const int up = (i == d.levels - 1) ? (d.base_channels << d.levels)
                                           : (d.base_channels << (i + 1));
        specs.push_back({"dec" + std::to_string(i), up + (d.base_channels << i),
                         d.base_channels << i, 3});
    }
    specs.push_back({"head", d.base_channels, d.num_classes, 1});
    return specs;
}

}  // namespace

ModelParams init_model(const UNetDescriptor& desc, uint64_t seed) {
    desc.validate();
    ModelParams p;
    p.desc = desc;
    Rng rng(seed);
    for (const auto& s : layer_specs(desc)) {
        Tensor w({s.out_ch, s.in_ch, s.k, s.k});
        const double stdev = std::sqrt(2.0 / (static_cast<double>(s.in_ch) * s.k * s.k));
        for (auto& v : w.data) v = static_cast<float>(stdev * rng.normal());
        p.tensors.push_back({s.name + ".w", std::move(w)});
        p.tensors.push_back({s.name + ".b", Tensor({s.out_ch})});
    }
    return p;
}

Tensor unet_forward(const ModelParams& params, const Tensor& image, ForwardTrace* trace) {
    const auto& d = params.desc;
    if (image.shape.size() != 3 || image.dim(0) != d.in_channels)
        throw DataError("unet_forward: expected (" + std::to_string(d.in_channels) +
                        ",H,W) image, got " + image.shape_str());
    const int div = 1 << d.levels;
    if (image.dim(1) % div != 0 || image.dim(2) % div != 0)
        throw DataError("unet_forward: spatial dims " + image.shape_str() +
                        " not divisible by 2^levels = " + std::to_string(div));

    const int L = d.levels;
    if (trace) {
        trace->conv_in.assign(2 * L + 2, Tensor());
        trace->pre_relu.assign(2 * L + 1, Tensor());
        trace->pool_argmax.assign(L, {});
        trace->pool_in_shape.assign(L, {});
        trace->recorded = true;
    }

    std::vector<Tensor> skip(L);
    Tensor x = image;
    for (int i = 0; i < L; ++i) {
        const std::string nm = "enc" + std::to_string(i);
        if (trace) trace->conv_in[i] = x;
        Tensor pre = conv2d(x, params.find(nm + ".w"), params.find(nm + ".b"));
        if (trace) trace->pre_relu[i] = pre;
        skip[i] = relu(pre);
        if (trace) trace->pool_in_shape[i] = skip[i].shape;
        x = maxpool2(skip[i], trace ? &trace->pool_argmax[i] : nullptr);
    }
    if (trace) trace->conv_in[L] = x;
    Tensor pre = conv2d(x, params.find("bottleneck.w"), params.find("bottleneck.b"));
    if (trace) trace->pre_relu[L] = pre;
    x = relu(pre);
    for (int i = L - 1; i >= 0; --i) {
        const std::string nm = "dec" + std::to_string(i);
        Tensor cat = concat_channels(upsample2(x), skip[i]);
        const int idx = 2 * L - i;
        if (trace) trace->conv_in[idx] = cat;
        Tensor dpre = conv2d(cat, params.find(nm + ".w"), params.find(nm + ".b"));
        if (trace) trace->pre_relu[idx] = dpre;
        x = relu(dpre);
    }
    if (trace) trace->conv_in[2 * L + 1] = x;
    return conv2d(x, params.find("head.w"), params.find("head.b"));
}

GradientBundle unet_backward(const ModelParams& params, const ForwardTrace& trace,
                             const Tensor& logit_grad) {
    if (!trace.recorded)
        throw DataError("unet_backward called without a recorded forward pass");
    const auto& d = params.desc;
    const int L = d.levels;

    GradientBundle out;
    out.logit_grad = logit_grad;
    out.param_grads.reserve(params.tensors.size());
    for (const auto& nt : params.tensors) out.param_grads.push_back({nt.name, Tensor()});

    auto grad_of = [&](const std::string& name) -> Tensor& {
        for (auto& nt : out.param_grads)
            if (nt.name == name) return nt.t;
        throw DataError("gradient slot not found: " + name);
    };

    Tensor g, gin;
    conv2d_backward(trace.conv_in[2 * L + 1], params.find("head.w"), logit_grad, gin,
                    grad_of("head.w"), grad_of("head.b"));
    g = std::move(gin);

    std::vector<Tensor> skip_grad(L);
    for (int i = 0; i < L; ++i) {
        const std::string nm = "dec" + std::to_string(i);
        const int idx = 2 * L - i;
        g = relu_backward(trace.pre_relu[idx], g);
        conv2d_backward(trace.conv_in[idx], params.find(nm + ".w"), g, gin, grad_of(nm + ".w"),
                        grad_of(nm + ".b"));
        const int up_ch = (i == L - 1) ? (d.base_channels << L) : (d.base_channels << (i + 1));
        Tensor g_up, g_skip;
        concat_channels_backward(gin, up_ch, g_up, g_skip);
        skip_grad[i] = std::move(g_skip);
        g = upsample2_backward(g_up);
    }

    g = relu_backward(trace.pre_relu[L], g);
    conv2d_backward(trace.conv_in[L], params.find("bottleneck.w"), g, gin,
                    grad_of("bottleneck.w"), grad_of("bottleneck.b"));
    g = std::move(gin);

    for (int i = L - 1; i >= 0; --i) {
        const std::string nm = "enc" + std::to_string(i);
        Tensor gact = maxpool2_backward(g, trace.pool_argmax[i], trace.pool_in_shape[i]);
        for (size_t k = 0; k < gact.size(); ++k) gact.data[k] += skip_grad[i].data[k];
        g = relu_backward(trace.pre_relu[i], gact);
        conv2d_backward(trace.conv_in[i], params.find(nm + ".w"), g, gin, grad_of(nm + ".w"),
                        grad_of(nm + ".b"));
        g = std::move(gin);
    }
    return out;
}

}  // namespace seglab
