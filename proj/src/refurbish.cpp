#include "seglab/refurbish.hpp"

#include <algorithm>

#include "seglab/detection.hpp"
#include "seglab/errors.hpp"
#include "seglab/metrics.hpp"
#include "seglab/ops.hpp"

namespace seglab {

void Schedule::validate() const {
    if (warm_up < window_t)
        throw ConfigError("schedule: warm_up (" + std::to_string(warm_up) +
                          ") must be >= window_t (" + std::to_string(window_t) + ")");
    if (interval < 1) throw ConfigError("schedule: interval must be >= 1");
    if (window_t < 1) throw ConfigError("schedule: window_t must be >= 1");
}

void HistoryStore::record(const std::string& id, int epoch, const Tensor& probs) {
    if (probs.shape.size() != 3) throw DataError("history store expects (C,H,W) probability maps");
    if (full_shape_.empty()) {
        full_shape_ = probs.shape;
        Tensor probe = probs;
        flatten_pooled(probe, cap_, &pool_factor_);
    } else if (probs.shape != full_shape_) {
        throw DataError("history store: map shape " + probs.shape_str() + " changed (sample " + id +
                        ")");
    }
    Entry e;
    e.epoch = epoch;
    if (pool_factor_ == 1) {
        e.probs = probs;
    } else {
        int f = 1;
        Tensor pooled({probs.dim(0), probs.dim(1) / pool_factor_, probs.dim(2) / pool_factor_});
        pooled.data = flatten_pooled(probs, cap_, &f);
        e.probs = std::move(pooled);
    }
    auto& dq = by_id_[id];
    dq.push_back(std::move(e));
    while (dq.size() > static_cast<size_t>(window_)) dq.pop_front();
}

bool HistoryStore::has_window(const std::string& id, int epoch) const {
    auto it = by_id_.find(id);
    if (it == by_id_.end()) return false;
    const int first = epoch - window_ + 1;
    int have = 0;
    for (const auto& e : it->second)
        if (e.epoch >= first && e.epoch <= epoch) ++have;
    return have == window_;
}

const std::deque<HistoryStore::Entry>& HistoryStore::history(const std::string& id) const {
    auto it = by_id_.find(id);
    if (it == by_id_.end()) throw DataError("history store: unknown sample " + id);
    return it->second;
}

PseudoLabel pseudo_label(const HistoryStore& hist, const std::string& id, int epoch) {
    const auto& dq = hist.history(id);
    const int w = hist.window();
    const int first = epoch - w + 1;
    std::vector<const Tensor*> maps;
    for (const auto& e : dq)
        if (e.epoch >= first && e.epoch <= epoch) maps.push_back(&e.probs);
    if (static_cast<int>(maps.size()) != w)
        throw DataError("pseudo_label: sample " + id + " holds " + std::to_string(maps.size()) +
                        " of " + std::to_string(w) + " prediction epochs ending at " +
                        std::to_string(epoch));

    Tensor mean(maps[0]->shape);
    for (const Tensor* m : maps)
        for (size_t i = 0; i < mean.size(); ++i) mean.data[i] += m->data[i];
    const float inv = 1.0f / static_cast<float>(w);
    for (auto& v : mean.data) v *= inv;

    PseudoLabel out;
    // pooled histories are brought back to full resolution before the argmax
    for (int f = hist.pool_factor(); f > 1; f /= 2) mean = upsample2(mean);
    const int c = mean.dim(0), h = mean.dim(1), wth = mean.dim(2);
    out.hard = Mask(h, wth);
    const size_t plane = static_cast<size_t>(h) * wth;
    for (size_t p = 0; p < plane; ++p) {
        int best = 0;
        float bv = mean.data[p];
        for (int ch = 1; ch < c; ++ch) {
            const float v = mean.data[ch * plane + p];
            if (v > bv) {  // strict: ties keep the lowest class index
                bv = v;
                best = ch;
            }
        }
        out.hard.data[p] = static_cast<uint8_t>(best);
    }
    out.soft = std::move(mean);
    return out;
}

RefurbishmentEvent refurbish_step(Dataset& ds, const std::vector<std::string>& flagged,
                                  const HistoryStore& hist, int epoch, const Schedule& sched) {
    if (!sched.is_event_epoch(epoch))
        throw DataError("refurbish_step: epoch " + std::to_string(epoch) +
                        " is not an event epoch (warm_up " + std::to_string(sched.warm_up) +
                        ", interval " + std::to_string(sched.interval) + ")");
    RefurbishmentEvent ev;
    ev.epoch = epoch;
    for (const auto& id : flagged) {
        LabeledSample& s = ds.by_id(id);
        if (s.split != Split::train)
            throw DataError("refurbish_step: sample " + id + " is in the " +
                            split_name(s.split) + " split; only training labels are refurbished");
        PseudoLabel pl = pseudo_label(hist, id, epoch);
        RefurbishRecord rec;
        rec.id = id;
        rec.dice_before = foreground_dice(s.mask, s.clean_mask);
        rec.dice_after = foreground_dice(pl.hard, s.clean_mask);
        s.mask = std::move(pl.hard);
        ev.records.push_back(std::move(rec));
    }
    return ev;
}

}  // namespace seglab
