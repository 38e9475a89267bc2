#include "seglab/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "seglab/errors.hpp"
#include "seglab/parallel.hpp"

namespace seglab {

double dice(const Mask& a, const Mask& b, int cls) {
    if (a.height != b.height || a.width != b.width)
        throw DataError("dice: mask shapes disagree (" + std::to_string(a.height) + "x" +
                        std::to_string(a.width) + " vs " + std::to_string(b.height) + "x" +
                        std::to_string(b.width) + ")");
    size_t na = 0, nb = 0, inter = 0;
    for (size_t i = 0; i < a.data.size(); ++i) {
        const bool ia = a.data[i] == cls, ib = b.data[i] == cls;
        na += ia;
        nb += ib;
        inter += ia && ib;
    }
    if (na + nb == 0) return 1.0;
    return 2.0 * static_cast<double>(inter) / static_cast<double>(na + nb);
}

DiceVector dice_vector(const Mask& pred, const Mask& ref) {
    DiceVector v;
    double sum = 0.0;
    for (int c = 1; c <= 3; ++c) {
        v.per_class[c - 1] = dice(pred, ref, c);
        sum += v.per_class[c - 1];
    }
    v.foreground_mean = sum / 3.0;
    return v;
}

double foreground_dice(const Mask& pred, const Mask& ref) {
    return dice_vector(pred, ref).foreground_mean;
}

namespace {

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

}  // namespace

PairedTestResult wilcoxon_signed_rank(const std::vector<double>& diffs) {
    std::vector<double> nz;
    for (double d : diffs)
        if (d != 0.0) nz.push_back(d);

    PairedTestResult r;
    r.n_effective = static_cast<int>(nz.size());
    if (nz.empty()) {
        r.underpowered = true;
        r.p_value = 1.0;
        return r;
    }

    const size_t n = nz.size();
    std::vector<size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](size_t a, size_t b) { return std::fabs(nz[a]) < std::fabs(nz[b]); });

    // average ranks over groups of tied absolute values
    std::vector<double> rank(n, 0.0);
    std::vector<size_t> tie_sizes;
    for (size_t i = 0; i < n;) {
        size_t j = i;
        while (j < n && std::fabs(nz[order[j]]) == std::fabs(nz[order[i]])) ++j;
        const double avg = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
        for (size_t k = i; k < j; ++k) rank[order[k]] = avg;
        tie_sizes.push_back(j - i);
        i = j;
    }

    double w_pos = 0.0, total = 0.0;
    for (size_t i = 0; i < n; ++i) {
        total += rank[i];
        if (nz[i] > 0.0) w_pos += rank[i];
    }
    const double w_neg = total - w_pos;
    r.w_statistic = std::min(w_pos, w_neg);

    if (r.n_effective < 5) {
        r.underpowered = true;
        r.p_value = 1.0;
        return r;
    }

    if (n <= 12) {
        // exact null distribution over all sign assignments
        r.exact = true;
        const size_t combos = size_t(1) << n;
        const double eps = 1e-9;
        size_t count = 0;
        for (size_t bits = 0; bits < combos; ++bits) {
            double t = 0.0;
            for (size_t i = 0; i < n; ++i)
                if (bits & (size_t(1) << i)) t += rank[i];
            if (t <= r.w_statistic + eps || t >= total - r.w_statistic - eps) ++count;
        }
        r.p_value = std::min(1.0, static_cast<double>(count) / static_cast<double>(combos));
    } else {
        const double dn = static_cast<double>(n);
        const double mu = dn * (dn + 1.0) / 4.0;
        double tie_corr = 0.0;
        for (size_t t : tie_sizes) {
            const double td = static_cast<double>(t);
            tie_corr += td * td * td - td;
        }
        const double var = dn * (dn + 1.0) * (2.0 * dn + 1.0) / 24.0 - tie_corr / 48.0;
        if (var <= 0.0) {
            r.p_value = 1.0;
        } else {
            const double z = (r.w_statistic - mu + 0.5) / std::sqrt(var);
            r.p_value = std::min(1.0, 2.0 * normal_cdf(z));
        }
    }
    if (r.p_value <= 0.0) r.p_value = std::numeric_limits<double>::min();
    r.significant_at_0_05 = !r.underpowered && r.p_value < 0.05;
    return r;
}

SummaryStats summarize(const std::vector<double>& values) {
    SummaryStats s;
    if (values.empty()) return s;
    const size_t n = values.size();
    double sum = 0.0;
    for (double v : values) sum += v;
    s.mean = sum / static_cast<double>(n);
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.stddev = n > 1 ? std::sqrt(ss / static_cast<double>(n - 1)) : 0.0;

    std::vector<double> sorted = values;
    std::sort(sorted.begin(), sorted.end());
    auto quantile = [&](double p) {
        const double pos = p * static_cast<double>(n - 1);
        const size_t lo = static_cast<size_t>(pos);
        const double frac = pos - static_cast<double>(lo);
        if (lo + 1 >= n) return sorted[n - 1];
        return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
    };
    s.q1 = quantile(0.25);
    s.median = quantile(0.5);
    s.q3 = quantile(0.75);
    s.min = sorted.front();
    s.max = sorted.back();
    return s;
}

Mask argmax_mask(const Tensor& logits) {
    const int c = logits.dim(0), h = logits.dim(1), w = logits.dim(2);
    Mask m(h, w);
    const size_t plane = static_cast<size_t>(h) * w;
    for (size_t p = 0; p < plane; ++p) {
        int best = 0;
        float bv = logits.data[p];
        for (int ch = 1; ch < c; ++ch) {
            const float v = logits.data[ch * plane + p];
            if (v > bv) {
                bv = v;
                best = ch;
            }
        }
        m.data[p] = static_cast<uint8_t>(best);
    }
    return m;
}

EvaluationResult evaluate_model(const ModelParams& params,
                                const std::vector<const LabeledSample*>& samples) {
    if (samples.empty()) throw DataError("evaluate_model: empty sample list");
    EvaluationResult res;
    res.ids.resize(samples.size());
    res.per_sample.resize(samples.size());
    parallel_for(samples.size(), [&](size_t i) {
        const Tensor logits = unet_forward(params, samples[i]->image);
        res.ids[i] = samples[i]->id;
        res.per_sample[i] = dice_vector(argmax_mask(logits), samples[i]->clean_mask);
    });

    for (int c = 0; c < 3; ++c) {
        std::vector<double> vals(samples.size());
        for (size_t i = 0; i < samples.size(); ++i) vals[i] = res.per_sample[i].per_class[c];
        res.per_class_summary[c] = summarize(vals);
    }
    std::vector<double> fg(samples.size());
    for (size_t i = 0; i < samples.size(); ++i) fg[i] = res.per_sample[i].foreground_mean;
    res.foreground_summary = summarize(fg);
    return res;
}

}  // namespace seglab
