#include "seglab/phantom.hpp"

#include <cmath>
#include <cstdio>

#include "seglab/errors.hpp"
#include "seglab/morphology.hpp"
#include "seglab/rng.hpp"

namespace seglab {

namespace {

bool is_pow2(int v) { return v > 0 && (v & (v - 1)) == 0; }

struct Ellipse {
    double cx, cy, a, b, theta;
};

Region rasterize(const Ellipse& e, int h, int w) {
    Region r(h, w);
    const double c = std::cos(e.theta), s = std::sin(e.theta);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const double dx = x - e.cx, dy = y - e.cy;
            const double u = (dx * c + dy * s) / e.a;
            const double v = (-dx * s + dy * c) / e.b;
            if (u * u + v * v <= 1.0) r.at(y, x) = 1;
        }
    }
    return r;
}

bool touches_border(const Region& r) {
    for (int x = 0; x < r.width; ++x)
        if (r.at(0, x) || r.at(r.height - 1, x)) return true;
    for (int y = 0; y < r.height; ++y)
        if (r.at(y, 0) || r.at(y, r.width - 1)) return true;
    return false;
}

int max_row(const Region& r) {
    for (int y = r.height - 1; y >= 0; --y)
        for (int x = 0; x < r.width; ++x)
            if (r.at(y, x)) return y;
    return -1;
}

bool disjoint(const Region& a, const Region& b) {
    for (size_t i = 0; i < a.in.size(); ++i)
        if (a.in[i] && b.in[i]) return false;
    return true;
}

// 3x3 binomial blur with clamped borders.
void blur3(Tensor& img) {
    const int h = img.dim(1), w = img.dim(2);
    Tensor src = img;
    static const int kk[3] = {1, 2, 1};
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            double acc = 0.0;
            for (int dy = -1; dy <= 1; ++dy) {
                const int yy = std::min(std::max(y + dy, 0), h - 1);
                for (int dx = -1; dx <= 1; ++dx) {
                    const int xx = std::min(std::max(x + dx, 0), w - 1);
                    acc += kk[dy + 1] * kk[dx + 1] * static_cast<double>(src.at(0, yy, xx));
                }
            }
            img.at(0, y, x) = static_cast<float>(acc / 16.0);
        }
    }
}

LabeledSample make_sample(const std::string& id, int h, int w, Rng sample_rng,
                          const PhantomParams& params) {
    const double hs = h, ws = w;
    const int max_ring = std::max(2, std::min(4, h / 16));

    for (int attempt = 0; attempt < 100; ++attempt) {
        Rng rng = sample_rng.fork(static_cast<uint64_t>(attempt));

        Ellipse lv;
        lv.cx = rng.uniform(0.35, 0.65) * ws;
        lv.cy = rng.uniform(0.22, 0.36) * hs;
        lv.a = rng.uniform(0.10, 0.16) * ws;
        lv.b = rng.uniform(0.12, 0.18) * hs;
        lv.theta = rng.uniform(-0.3, 0.3);
        const int ring = 2 + static_cast<int>(rng.uniform_int(static_cast<uint64_t>(max_ring - 1)));

        Ellipse la;
        la.a = rng.uniform(0.08, 0.13) * ws;
        la.b = rng.uniform(0.08, 0.12) * hs;
        la.cx = lv.cx + rng.uniform(-0.06, 0.06) * ws;
        la.theta = rng.uniform(-0.3, 0.3);
        const double gap = rng.uniform(1.0, 3.0);

        Region lv_region = rasterize(lv, h, w);
        const auto se = StructuringElement::disk(ring);
        Region dilated = dilate(lv_region, se);
        if (touches_border(dilated)) continue;

        la.cy = max_row(dilated) + gap + la.b + 1.0;
        Region la_region = rasterize(la, h, w);
        if (touches_border(la_region)) continue;
        if (!disjoint(la_region, dilated)) continue;

        Mask mask(h, w);
        for (size_t i = 0; i < mask.data.size(); ++i) {
            if (lv_region.in[i])
                mask.data[i] = 1;
            else if (dilated.in[i])
                mask.data[i] = 2;
            else if (la_region.in[i])
                mask.data[i] = 3;
        }
        bool big_enough = true;
        for (int cls = 1; cls <= 3 && big_enough; ++cls)
            big_enough = class_area(mask, cls) >= 16;
        if (!big_enough) continue;

        // texture: per-class base intensity, multiplicative speckle, additive
        // illumination plane, binomial blur, clamp
        Tensor img({1, h, w});
        const double gx = rng.uniform(-0.15, 0.15);
        const double gy = rng.uniform(-0.15, 0.15);
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) {
                const double base = params.base_intensity[mask.at(y, x)];
                const double speckled = base * (1.0 + params.speckle_sigma * rng.normal());
                const double illum = gx * (static_cast<double>(x) / (w - 1) - 0.5) +
                                     gy * (static_cast<double>(y) / (h - 1) - 0.5);
                img.at(0, y, x) = static_cast<float>(speckled + illum);
            }
        }
        blur3(img);
        for (auto& v : img.data) v = std::fmin(std::fmax(v, 0.0f), 1.0f);

        LabeledSample s;
        s.id = id;
        s.image = std::move(img);
        s.mask = mask;
        s.clean_mask = std::move(mask);
        return s;
    }
    throw DataError("phantom generation failed for sample " + id +
                    ": structures did not fit the canvas in 100 attempts");
}

}  // namespace

Dataset generate_phantom(int n, int height, int width, uint64_t seed, const PhantomParams& params) {
    if (n <= 0) throw ConfigError("phantom: sample count must be positive");
    if (!is_pow2(height) || !is_pow2(width) || height < 32 || width < 32)
        throw ConfigError("phantom: H and W must be powers of two >= 32, got " +
                          std::to_string(height) + "x" + std::to_string(width));

    Dataset ds;
    ds.meta.n = n;
    ds.meta.generator_seed = seed;
    ds.meta.params = params;
    ds.meta.params.height = height;
    ds.meta.params.width = width;

    Rng master(seed);
    ds.samples.reserve(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) {
        char id[16];
        std::snprintf(id, sizeof(id), "s%04d", i);
        ds.samples.push_back(
            make_sample(id, height, width, master.fork(static_cast<uint64_t>(i)), ds.meta.params));
    }
    return ds;
}

}  // namespace seglab
