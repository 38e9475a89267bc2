#include "seglab/corruption.hpp"

#include <algorithm>
#include <cmath>

#include "seglab/errors.hpp"
#include "seglab/morphology.hpp"
#include "seglab/rng.hpp"

namespace seglab {

const char* corruption_mode_name(CorruptionMode m) {
    return m == CorruptionMode::random ? "random" : "systematic";
}

CorruptionMode corruption_mode_from_name(const std::string& s) {
    if (s == "random") return CorruptionMode::random;
    if (s == "systematic") return CorruptionMode::systematic;
    throw ConfigError("unknown corruption mode: " + s);
}

void CorruptionSpec::validate() const {
    if (proportion < 0.0 || proportion > 1.0)
        throw ConfigError("corruption proportion must be in [0,1], got " + std::to_string(proportion));
    if (radius_min < 1 || radius_max < radius_min || radius_fixed < 1)
        throw ConfigError("corruption radius parameters must be >= 1");
    if (!(removal_fraction_min > 0.0 && removal_fraction_max < 1.0 &&
          removal_fraction_min <= removal_fraction_max) ||
        !(removal_fraction_fixed > 0.0 && removal_fraction_fixed < 1.0))
        throw ConfigError("incomplete-label removal fractions must lie in (0,1)");
}

Mask incomplete_label(const Mask& mask, int cls, double fraction, uint64_t seed) {
    if (fraction <= 0.0 || fraction >= 1.0)
        throw DataError("incomplete_label: fraction must be in (0,1), got " + std::to_string(fraction));
    struct Px {
        double proj;
        size_t idx;
    };
    std::vector<Px> pixels;
    for (size_t i = 0; i < mask.data.size(); ++i)
        if (mask.data[i] == cls) pixels.push_back({0.0, i});
    if (pixels.empty())
        throw DataError("incomplete_label: class " + std::to_string(cls) + " absent from mask");

    const auto target = static_cast<size_t>(std::llround(fraction * static_cast<double>(pixels.size())));
    if (target == 0) return mask;

    Rng rng(seed);
    const double theta = rng.uniform(0.0, 6.283185307179586);
    const double c = std::cos(theta), s = std::sin(theta);
    for (auto& p : pixels) {
        const double y = static_cast<double>(p.idx / static_cast<size_t>(mask.width));
        const double x = static_cast<double>(p.idx % static_cast<size_t>(mask.width));
        p.proj = x * c + y * s;
    }
    // sweep the cut line in from the far side until exactly `target` pixels fall off
    std::sort(pixels.begin(), pixels.end(), [](const Px& a, const Px& b) {
        return a.proj > b.proj || (a.proj == b.proj && a.idx < b.idx);
    });
    Mask out = mask;
    for (size_t i = 0; i < target; ++i) out.data[pixels[i].idx] = 0;
    return out;
}

Mask boundary_distortion(const Mask& mask, int cls, BoundaryOp op, int radius) {
    Region region = region_of_class(mask, cls);
    if (region.area() == 0)
        throw DataError("boundary_distortion: class " + std::to_string(cls) + " absent from mask");
    const auto se = StructuringElement::disk(radius);
    Mask out = mask;
    if (op == BoundaryOp::dilate) {
        Region d = dilate(region, se);
        for (size_t i = 0; i < d.in.size(); ++i)
            if (d.in[i]) out.data[i] = static_cast<uint8_t>(cls);
    } else {
        Region e = erode(region, se);
        for (size_t i = 0; i < region.in.size(); ++i)
            if (region.in[i] && !e.in[i]) out.data[i] = 0;
    }
    return out;
}

Mask merged_labels(const Mask& mask, int source, int target) {
    if (source == target)
        throw DataError("merged_labels: source and target class are both " + std::to_string(source));
    if (class_area(mask, source) == 0)
        throw DataError("merged_labels: source class " + std::to_string(source) + " absent");
    Mask out = mask;
    for (auto& v : out.data)
        if (v == source) v = static_cast<uint8_t>(target);
    return out;
}

namespace {

std::vector<int> present_foreground(const Mask& m) {
    std::vector<int> classes;
    for (int c = 1; c <= 3; ++c)
        if (class_area(m, c) > 0) classes.push_back(c);
    return classes;
}

Mask apply_edit(const LabeledSample& s, const CorruptionSpec& spec, Rng rng) {
    const Mask& m = s.mask;
    switch (spec.kind) {
        case CorruptionKind::incomplete: {
            int cls;
            double f;
            if (spec.mode == CorruptionMode::systematic) {
                cls = 1;  // LV is consistently partially annotated
                f = spec.removal_fraction_fixed;
            } else {
                const auto classes = present_foreground(m);
                if (classes.empty()) throw DataError("sample " + s.id + ": no foreground to corrupt");
                cls = classes[rng.uniform_int(classes.size())];
                f = rng.uniform(spec.removal_fraction_min, spec.removal_fraction_max);
            }
            return incomplete_label(m, cls, f, rng.next_u64());
        }
        case CorruptionKind::boundary: {
            if (spec.mode == CorruptionMode::systematic) {
                // all structures are consistently eroded
                Mask out = m;
                for (int cls = 1; cls <= 3; ++cls)
                    if (class_area(out, cls) > 0)
                        out = boundary_distortion(out, cls, BoundaryOp::erode, spec.radius_fixed);
                return out;
            }
            const auto classes = present_foreground(m);
            if (classes.empty()) throw DataError("sample " + s.id + ": no foreground to corrupt");
            const int cls = classes[rng.uniform_int(classes.size())];
            const BoundaryOp op = rng.uniform_int(2) == 0 ? BoundaryOp::dilate : BoundaryOp::erode;
            const int radius =
                spec.radius_min +
                static_cast<int>(rng.uniform_int(static_cast<uint64_t>(spec.radius_max - spec.radius_min + 1)));
            return boundary_distortion(m, cls, op, radius);
        }
        default: {
            if (spec.mode == CorruptionMode::systematic) return merged_labels(m, 2, 1);  // LVM -> LV
            const auto classes = present_foreground(m);
            if (classes.size() < 2)
                throw DataError("sample " + s.id + ": merged-labels corruption needs two classes");
            const size_t si = rng.uniform_int(classes.size());
            size_t ti = rng.uniform_int(classes.size() - 1);
            if (ti >= si) ++ti;
            return merged_labels(m, classes[si], classes[ti]);
        }
    }
}

}  // namespace

CorruptionOutcome corrupt_dataset(Dataset& ds, const CorruptionSpec& spec) {
    spec.validate();
    CorruptionOutcome out;

    std::vector<size_t> eligible;
    for (size_t i = 0; i < ds.samples.size(); ++i)
        if (ds.samples[i].split != Split::test) eligible.push_back(i);

    const auto count = static_cast<size_t>(
        std::floor(spec.proportion * static_cast<double>(eligible.size()) + 0.5));
    if (count == 0) {
        out.zero_sample_warning = spec.proportion > 0.0;
        return out;
    }

    Rng master(spec.seed);
    Rng pick_rng = master.fork(0);
    pick_rng.shuffle(eligible);
    std::vector<size_t> chosen(eligible.begin(), eligible.begin() + static_cast<long>(count));
    std::sort(chosen.begin(), chosen.end());

    for (size_t idx : chosen) {
        LabeledSample& s = ds.samples[idx];
        Mask edited = apply_edit(s, spec, master.fork(1 + idx));
        if (edited == s.clean_mask)
            throw DataError("corruption left sample " + s.id + " unchanged");
        s.mask = std::move(edited);
        s.corrupted = true;
        s.corruption_kind = spec.kind;
        out.corrupted_ids.push_back(s.id);
    }
    return out;
}

}  // namespace seglab
