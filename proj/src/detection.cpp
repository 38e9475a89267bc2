#include "seglab/detection.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "seglab/errors.hpp"
#include "seglab/parallel.hpp"

namespace seglab {

std::vector<float> flatten_pooled(const Tensor& map, size_t cap, int* factor) {
    if (map.shape.size() != 3) throw DataError("flatten_pooled expects (C,H,W)");
    Tensor cur = map;
    int f = 1;
    while (cur.size() > cap && cur.dim(1) % 2 == 0 && cur.dim(2) % 2 == 0 && cur.dim(1) > 1 &&
           cur.dim(2) > 1) {
        const int c = cur.dim(0), h = cur.dim(1), w = cur.dim(2);
        Tensor next({c, h / 2, w / 2});
        for (int ch = 0; ch < c; ++ch)
            for (int y = 0; y < h / 2; ++y)
                for (int x = 0; x < w / 2; ++x)
                    next.at(ch, y, x) = 0.25f * (cur.at(ch, 2 * y, 2 * x) + cur.at(ch, 2 * y, 2 * x + 1) +
                                                 cur.at(ch, 2 * y + 1, 2 * x) +
                                                 cur.at(ch, 2 * y + 1, 2 * x + 1));
        cur = std::move(next);
        f *= 2;
    }
    if (factor) *factor = f;
    return std::move(cur.data);
}

void TraceStore::record_epoch(const std::string& id, int epoch, std::vector<float> grad_vec,
                              double loss) {
    if (dim_ == 0) dim_ = grad_vec.size();
    if (grad_vec.size() != dim_)
        throw DataError("trace store: gradient dimension " + std::to_string(grad_vec.size()) +
                        " != established D = " + std::to_string(dim_) + " (sample " + id + ")");
    auto& t = traces_[id];
    t.grads.emplace_back(epoch, std::move(grad_vec));
    while (t.grads.size() > static_cast<size_t>(window_t_ + 1)) t.grads.pop_front();
    t.losses.emplace_back(epoch, loss);
    while (t.losses.size() > static_cast<size_t>(window_t_)) t.losses.pop_front();
}

const TraceStore::SampleTrace& TraceStore::trace(const std::string& id) const {
    auto it = traces_.find(id);
    if (it == traces_.end()) throw DataError("trace store: unknown sample " + id);
    return it->second;
}

std::vector<std::string> TraceStore::ids() const {
    std::vector<std::string> out;
    out.reserve(traces_.size());
    for (const auto& [id, _] : traces_) out.push_back(id);
    return out;
}

bool TraceStore::has_window(const std::string& id, int epoch, VogWindow mode) const {
    auto it = traces_.find(id);
    if (it == traces_.end()) return false;
    const int need = window_t_ + (mode == VogWindow::literal ? 1 : 0);
    const int first = epoch - need + 1;
    int have = 0;
    for (const auto& [e, _] : it->second.grads)
        if (e >= first && e <= epoch) ++have;
    return have == need;
}

namespace {

// Collects pointers to the window's vectors in ascending epoch order.
std::vector<const std::vector<float>*> window_vecs(const TraceStore::SampleTrace& t, int epoch,
                                                   int need, const std::string& id) {
    std::vector<const std::vector<float>*> vecs;
    const int first = epoch - need + 1;
    for (const auto& [e, v] : t.grads)
        if (e >= first && e <= epoch) vecs.push_back(&v);
    if (static_cast<int>(vecs.size()) != need)
        throw DataError("vog: sample " + id + " holds " + std::to_string(vecs.size()) +
                        " of the " + std::to_string(need) + " epochs ending at " +
                        std::to_string(epoch) + "; wait for the warm-up to fill the window");
    return vecs;
}

}  // namespace

VogScore vog(const TraceStore& store, const std::string& id, int epoch, VogWindow mode) {
    const int t = store.window_t();
    const int w = t + (mode == VogWindow::literal ? 1 : 0);
    const auto vecs = window_vecs(store.trace(id), epoch, w, id);
    const size_t dim = store.dim();

    VogScore out;
    out.id = id;
    out.epoch = epoch;
    out.window_mean.resize(dim);
    double total = 0.0;
    for (size_t d = 0; d < dim; ++d) {
        // Welford over the window entries for this dimension
        double mean = 0.0, m2 = 0.0;
        for (int k = 0; k < w; ++k) {
            const double x = (*vecs[static_cast<size_t>(k)])[d];
            const double delta = x - mean;
            mean += delta / (k + 1);
            m2 += delta * (x - mean);
        }
        double var;
        if (mode == VogWindow::last_t) {
            out.window_mean[d] = static_cast<float>(mean);
            var = m2 / t;
        } else {
            // printed bounds: mu = (1/t) * sum over t+1 entries
            const double mu = mean * w / t;
            out.window_mean[d] = static_cast<float>(mu);
            var = (m2 + w * (mean - mu) * (mean - mu)) / t;
        }
        total += std::sqrt(var);
    }
    out.score = total / static_cast<double>(dim);
    return out;
}

double loss_score(const TraceStore& store, const std::string& id, int epoch) {
    const int t = store.window_t();
    const auto& trace = store.trace(id);
    const int first = epoch - t + 1;
    double sum = 0.0;
    int have = 0;
    for (const auto& [e, l] : trace.losses)
        if (e >= first && e <= epoch) {
            sum += l;
            ++have;
        }
    if (have != t)
        throw DataError("loss_score: sample " + id + " holds " + std::to_string(have) + " of " +
                        std::to_string(t) + " losses ending at epoch " + std::to_string(epoch));
    return sum / t;
}

std::map<std::string, double> vog_scores(const TraceStore& store, int epoch, VogWindow mode) {
    const auto ids = store.ids();
    std::vector<double> vals(ids.size());
    parallel_for(ids.size(), [&](size_t i) { vals[i] = vog(store, ids[i], epoch, mode).score; });
    std::map<std::string, double> out;
    for (size_t i = 0; i < ids.size(); ++i) out[ids[i]] = vals[i];
    return out;
}

std::map<std::string, double> loss_scores(const TraceStore& store, int epoch) {
    std::map<std::string, double> out;
    for (const auto& id : store.ids()) out[id] = loss_score(store, id, epoch);
    return out;
}

IqrResult iqr_flag(const std::map<std::string, double>& scores) {
    const size_t n = scores.size();
    if (n < 4)
        throw DataError("iqr_flag needs at least 4 scores, got " + std::to_string(n));
    std::vector<double> sorted;
    sorted.reserve(n);
    for (const auto& [_, v] : scores) sorted.push_back(v);
    std::sort(sorted.begin(), sorted.end());

    auto quantile = [&](double p) {
        const double pos = p * static_cast<double>(n - 1);
        const size_t lo = static_cast<size_t>(pos);
        const double frac = pos - static_cast<double>(lo);
        if (lo + 1 >= n) return sorted[n - 1];
        return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
    };

    IqrResult r;
    r.q1 = quantile(0.25);
    r.q3 = quantile(0.75);
    r.threshold = r.q3 + 1.5 * (r.q3 - r.q1);
    for (const auto& [id, v] : scores)
        if (v > r.threshold) r.flagged.push_back(id);
    return r;
}

DetectionReport score_detection(const std::vector<std::string>& flagged,
                                const std::vector<std::string>& corrupted,
                                const std::vector<std::string>& all) {
    const std::set<std::string> fset(flagged.begin(), flagged.end());
    const std::set<std::string> cset(corrupted.begin(), corrupted.end());
    size_t tp = 0, tn = 0, fp = 0, fn = 0;
    DetectionReport rep;
    for (const auto& id : all) {
        const bool f = fset.count(id) > 0;
        const bool c = cset.count(id) > 0;
        tp += f && c;
        tn += !f && !c;
        fp += f && !c;
        fn += !f && c;
        rep.rows.push_back({id, 0.0, f, c});
    }
    const size_t n = all.size();
    rep.accuracy = n == 0 ? 1.0 : static_cast<double>(tp + tn) / static_cast<double>(n);
    rep.sensitivity = (tp + fn) == 0 ? 1.0 : static_cast<double>(tp) / static_cast<double>(tp + fn);
    rep.specificity = (tn + fp) == 0 ? 1.0 : static_cast<double>(tn) / static_cast<double>(tn + fp);
    return rep;
}

DetectionReport detect(const std::map<std::string, double>& scores,
                       const std::vector<std::string>& corrupted_ids, int epoch,
                       const std::string& detector) {
    const IqrResult iqr = iqr_flag(scores);
    std::vector<std::string> all;
    all.reserve(scores.size());
    for (const auto& [id, _] : scores) all.push_back(id);
    DetectionReport rep = score_detection(iqr.flagged, corrupted_ids, all);
    rep.detector = detector;
    rep.epoch = epoch;
    rep.threshold = iqr.threshold;
    for (auto& row : rep.rows) row.score = scores.at(row.id);
    return rep;
}

}  // namespace seglab
