#include "seglab/ops.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

#include "seglab/errors.hpp"

namespace seglab {

namespace {

void check_rank3(const Tensor& t, const char* what) {
    if (t.shape.size() != 3) throw DataError(std::string(what) + " must be rank 3, got " + t.shape_str());
}

}  // namespace

Tensor conv2d(const Tensor& input, const Tensor& kernels, const Tensor& bias) {
    check_rank3(input, "conv2d input");
    if (kernels.shape.size() != 4)
        throw DataError("conv2d kernels must be rank 4, got " + kernels.shape_str());
    const int cin = input.dim(0), h = input.dim(1), w = input.dim(2);
    const int cout = kernels.dim(0), kcin = kernels.dim(1), kh = kernels.dim(2), kw = kernels.dim(3);
    if (kcin != cin)
        throw DataError("conv2d channel mismatch: input has " + std::to_string(cin) +
                        " channels, kernels expect " + std::to_string(kcin));
    if (kh % 2 == 0 || kw % 2 == 0)
        throw DataError("conv2d kernel spatial extent must be odd, got " + kernels.shape_str());
    if (static_cast<int>(bias.size()) != cout)
        throw DataError("conv2d bias length " + std::to_string(bias.size()) + " != out channels " +
                        std::to_string(cout));

    Tensor out({cout, h, w});
    const int ry = kh / 2, rx = kw / 2;
    const size_t plane = static_cast<size_t>(h) * w;
    for (int oc = 0; oc < cout; ++oc) {
        float* op = out.data.data() + static_cast<size_t>(oc) * plane;
        const float b = bias.data[static_cast<size_t>(oc)];
        for (size_t i = 0; i < plane; ++i) op[i] = b;
        for (int ic = 0; ic < cin; ++ic) {
            const float* ip = input.data.data() + static_cast<size_t>(ic) * plane;
            const float* kp = kernels.data.data() +
                              ((static_cast<size_t>(oc) * cin + ic) * kh) * kw;
            for (int ky = 0; ky < kh; ++ky) {
                const int dy = ky - ry;
                const int y0 = std::max(0, -dy), y1 = h - std::max(0, dy);
                for (int kx = 0; kx < kw; ++kx) {
                    const float kv = kp[static_cast<size_t>(ky) * kw + kx];
                    if (kv == 0.0f) continue;
                    const int dx = kx - rx;
                    const int x0 = std::max(0, -dx), x1 = w - std::max(0, dx);
                    if (x1 <= x0) continue;
                    for (int y = y0; y < y1; ++y) {
                        float* orow = op + static_cast<size_t>(y) * w;
                        const float* irow = ip + static_cast<size_t>(y + dy) * w + dx;
                        for (int x = x0; x < x1; ++x) orow[x] += kv * irow[x];
                    }
                }
            }
        }
    }
    return out;
}

void conv2d_backward(const Tensor& input, const Tensor& kernels, const Tensor& grad_out,
                     Tensor& grad_input, Tensor& grad_kernels, Tensor& grad_bias) {
    const int cin = input.dim(0), h = input.dim(1), w = input.dim(2);
    const int cout = kernels.dim(0), kh = kernels.dim(2), kw = kernels.dim(3);
    if (grad_out.shape != std::vector<int>{cout, h, w})
        throw DataError("conv2d_backward grad_out shape " + grad_out.shape_str() + " mismatch");

    grad_input = Tensor({cin, h, w});
    grad_kernels = Tensor(kernels.shape);
    grad_bias = Tensor({cout});

    const int ry = kh / 2, rx = kw / 2;
    const size_t plane = static_cast<size_t>(h) * w;
    for (int oc = 0; oc < cout; ++oc) {
        const float* gp = grad_out.data.data() + static_cast<size_t>(oc) * plane;
        double bsum = 0.0;
        for (size_t i = 0; i < plane; ++i) bsum += gp[i];
        grad_bias.data[static_cast<size_t>(oc)] = static_cast<float>(bsum);
        for (int ic = 0; ic < cin; ++ic) {
            const float* ip = input.data.data() + static_cast<size_t>(ic) * plane;
            float* gip = grad_input.data.data() + static_cast<size_t>(ic) * plane;
            const float* kp = kernels.data.data() + ((static_cast<size_t>(oc) * cin + ic) * kh) * kw;
            float* gkp = grad_kernels.data.data() + ((static_cast<size_t>(oc) * cin + ic) * kh) * kw;
            for (int ky = 0; ky < kh; ++ky) {
                const int dy = ky - ry;
                const int y0 = std::max(0, -dy), y1 = h - std::max(0, dy);
                for (int kx = 0; kx < kw; ++kx) {
                    const int dx = kx - rx;
                    const int x0 = std::max(0, -dx), x1 = w - std::max(0, dx);
                    if (x1 <= x0 || y1 <= y0) continue;
                    const float kv = kp[static_cast<size_t>(ky) * kw + kx];
                    double ksum = 0.0;
                    for (int y = y0; y < y1; ++y) {
                        const float* grow = gp + static_cast<size_t>(y) * w;
                        const float* irow = ip + static_cast<size_t>(y + dy) * w + dx;
                        float* girow = gip + static_cast<size_t>(y + dy) * w + dx;
                        double rsum = 0.0;
                        for (int x = x0; x < x1; ++x) {
                            girow[x] += kv * grow[x];
                            rsum += static_cast<double>(grow[x]) * irow[x];
                        }
                        ksum += rsum;
                    }
                    gkp[static_cast<size_t>(ky) * kw + kx] = static_cast<float>(ksum);
                }
            }
        }
    }
}

Tensor relu(const Tensor& x) {
    Tensor out(x.shape);
    for (size_t i = 0; i < x.size(); ++i) out.data[i] = x.data[i] > 0.0f ? x.data[i] : 0.0f;
    return out;
}

Tensor relu_backward(const Tensor& pre, const Tensor& grad_out) {
    if (!pre.same_shape(grad_out)) throw DataError("relu_backward shape mismatch");
    Tensor out(pre.shape);
    for (size_t i = 0; i < pre.size(); ++i)
        out.data[i] = pre.data[i] > 0.0f ? grad_out.data[i] : 0.0f;
    return out;
}

Tensor maxpool2(const Tensor& x, std::vector<int>* argmax) {
    check_rank3(x, "maxpool2 input");
    const int c = x.dim(0), h = x.dim(1), w = x.dim(2);
    if (h % 2 != 0 || w % 2 != 0)
        throw DataError("maxpool2 requires even spatial dims, got " + x.shape_str());
    const int oh = h / 2, ow = w / 2;
    Tensor out({c, oh, ow});
    if (argmax) argmax->assign(out.size(), 0);
    for (int ch = 0; ch < c; ++ch) {
        for (int y = 0; y < oh; ++y) {
            for (int xo = 0; xo < ow; ++xo) {
                int best = ((ch * h + 2 * y) * w) + 2 * xo;
                float bv = x.data[static_cast<size_t>(best)];
                const int cand[3] = {best + 1, best + w, best + w + 1};
                for (int k = 0; k < 3; ++k) {
                    const float v = x.data[static_cast<size_t>(cand[k])];
                    if (v > bv) {
                        bv = v;
                        best = cand[k];
                    }
                }
                out.at(ch, y, xo) = bv;
                if (argmax) (*argmax)[(static_cast<size_t>(ch) * oh + y) * ow + xo] = best;
            }
        }
    }
    return out;
}

Tensor maxpool2_backward(const Tensor& grad_out, const std::vector<int>& argmax,
                         const std::vector<int>& input_shape) {
    if (argmax.size() != grad_out.size()) throw DataError("maxpool2_backward argmax size mismatch");
    Tensor gin(input_shape);
    for (size_t i = 0; i < grad_out.size(); ++i)
        gin.data[static_cast<size_t>(argmax[i])] += grad_out.data[i];
    return gin;
}

Tensor upsample2(const Tensor& x) {
    check_rank3(x, "upsample2 input");
    const int c = x.dim(0), h = x.dim(1), w = x.dim(2);
    Tensor out({c, 2 * h, 2 * w});
    for (int ch = 0; ch < c; ++ch) {
        for (int y = 0; y < h; ++y) {
            const float* irow = x.data.data() + (static_cast<size_t>(ch) * h + y) * w;
            float* o0 = out.data.data() + (static_cast<size_t>(ch) * 2 * h + 2 * y) * 2 * w;
            float* o1 = o0 + 2 * w;
            for (int xo = 0; xo < w; ++xo) {
                const float v = irow[xo];
                o0[2 * xo] = v;
                o0[2 * xo + 1] = v;
                o1[2 * xo] = v;
                o1[2 * xo + 1] = v;
            }
        }
    }
    return out;
}

Tensor upsample2_backward(const Tensor& grad_out) {
    check_rank3(grad_out, "upsample2_backward input");
    const int c = grad_out.dim(0), h = grad_out.dim(1), w = grad_out.dim(2);
    if (h % 2 != 0 || w % 2 != 0)
        throw DataError("upsample2_backward requires even dims, got " + grad_out.shape_str());
    Tensor gin({c, h / 2, w / 2});
    for (int ch = 0; ch < c; ++ch) {
        for (int y = 0; y < h / 2; ++y) {
            const float* g0 = grad_out.data.data() + (static_cast<size_t>(ch) * h + 2 * y) * w;
            const float* g1 = g0 + w;
            float* orow = gin.data.data() + (static_cast<size_t>(ch) * (h / 2) + y) * (w / 2);
            for (int xo = 0; xo < w / 2; ++xo)
                orow[xo] = g0[2 * xo] + g0[2 * xo + 1] + g1[2 * xo] + g1[2 * xo + 1];
        }
    }
    return gin;
}

Tensor concat_channels(const Tensor& a, const Tensor& b) {
    check_rank3(a, "concat input");
    check_rank3(b, "concat input");
    if (a.dim(1) != b.dim(1) || a.dim(2) != b.dim(2))
        throw DataError("concat_channels spatial mismatch: " + a.shape_str() + " vs " + b.shape_str());
    Tensor out({a.dim(0) + b.dim(0), a.dim(1), a.dim(2)});
    std::memcpy(out.data.data(), a.data.data(), a.size() * sizeof(float));
    std::memcpy(out.data.data() + a.size(), b.data.data(), b.size() * sizeof(float));
    return out;
}

void concat_channels_backward(const Tensor& grad_out, int channels_a, Tensor& grad_a,
                              Tensor& grad_b) {
    const int c = grad_out.dim(0), h = grad_out.dim(1), w = grad_out.dim(2);
    if (channels_a <= 0 || channels_a >= c) throw DataError("concat_channels_backward bad split");
    grad_a = Tensor({channels_a, h, w});
    grad_b = Tensor({c - channels_a, h, w});
    std::memcpy(grad_a.data.data(), grad_out.data.data(), grad_a.size() * sizeof(float));
    std::memcpy(grad_b.data.data(), grad_out.data.data() + grad_a.size(),
                grad_b.size() * sizeof(float));
}

Tensor softmax_channels(const Tensor& logits) {
    check_rank3(logits, "softmax input");
    const int c = logits.dim(0), h = logits.dim(1), w = logits.dim(2);
    const size_t plane = static_cast<size_t>(h) * w;
    Tensor out(logits.shape);
    for (size_t p = 0; p < plane; ++p) {
        float mx = logits.data[p];
        for (int ch = 1; ch < c; ++ch) mx = std::max(mx, logits.data[ch * plane + p]);
        double denom = 0.0;
        for (int ch = 0; ch < c; ++ch) {
            const double e = std::exp(static_cast<double>(logits.data[ch * plane + p]) - mx);
            out.data[ch * plane + p] = static_cast<float>(e);
            denom += e;
        }
        const float inv = static_cast<float>(1.0 / denom);
        for (int ch = 0; ch < c; ++ch) out.data[ch * plane + p] *= inv;
    }
    return out;
}

CeResult softmax_cross_entropy(const Tensor& logits, const Mask& target) {
    check_rank3(logits, "cross-entropy logits");
    const int c = logits.dim(0), h = logits.dim(1), w = logits.dim(2);
    if (target.height != h || target.width != w)
        throw DataError("cross-entropy mask size " + std::to_string(target.height) + "x" +
                        std::to_string(target.width) + " != logits " + logits.shape_str());
    if (!logits.all_finite()) throw NumericError("cross-entropy: non-finite logits");

    const size_t plane = static_cast<size_t>(h) * w;
    CeResult r;
    r.probs = softmax_channels(logits);
    r.logit_grad = Tensor(logits.shape);
    const float inv_p = 1.0f / static_cast<float>(plane);
    double loss = 0.0;
    for (size_t p = 0; p < plane; ++p) {
        const int t = target.data[p];
        if (t < 0 || t >= c)
            throw DataError("cross-entropy: class index " + std::to_string(t) + " out of range [0," +
                            std::to_string(c) + ") at pixel " + std::to_string(p));
        const double pt = std::max(static_cast<double>(r.probs.data[t * plane + p]), 1e-300);
        loss -= std::log(pt);
        for (int ch = 0; ch < c; ++ch) {
            const float onehot = (ch == t) ? 1.0f : 0.0f;
            r.logit_grad.data[ch * plane + p] = (r.probs.data[ch * plane + p] - onehot) * inv_p;
        }
    }
    r.loss = loss / static_cast<double>(plane);
    return r;
}

}  // namespace seglab
