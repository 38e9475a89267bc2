#pragma once

#include <deque>
#include <map>
#include <string>
#include <vector>

#include "seglab/dataset.hpp"
#include "seglab/tensor.hpp"

namespace seglab {

// Alg-1 schedule: detection/refurbishment run at epochs E with E > warm_up and
// E % interval == 0. window_t is the VOG trailing-window length.
struct Schedule {
    int warm_up = 10;
    int interval = 5;
    int window_t = 5;

    void validate() const;
    bool is_event_epoch(int epoch) const { return epoch > warm_up && epoch % interval == 0; }
};

// Per-sample ring buffers of the last `window` softmax maps. Maps larger than
// the cap are average-pooled 2x on record and upsampled back before argmax.
class HistoryStore {
public:
    explicit HistoryStore(int window = 5, size_t cap = size_t(1) << 22) : window_(window), cap_(cap) {}

    void record(const std::string& id, int epoch, const Tensor& probs);
    bool has_window(const std::string& id, int epoch) const;
    int window() const { return window_; }
    int pool_factor() const { return pool_factor_; }

    struct Entry {
        int epoch;
        Tensor probs;  // possibly pooled
    };
    const std::deque<Entry>& history(const std::string& id) const;

private:
    int window_;
    size_t cap_;
    int pool_factor_ = 1;
    std::vector<int> full_shape_;
    std::map<std::string, std::deque<Entry>> by_id_;
};

struct PseudoLabel {
    Tensor soft;  // mean probability map at full resolution
    Mask hard;    // per-pixel argmax, ties to the lowest class index
};

// Mean of the `window` maps ending at epoch E. Rejects incomplete histories.
PseudoLabel pseudo_label(const HistoryStore& hist, const std::string& id, int epoch);

struct RefurbishRecord {
    std::string id;
    double dice_before = 0.0;  // foreground Dice of the outgoing mask vs clean
    double dice_after = 0.0;   // same for the incoming pseudo-label
};

struct RefurbishmentEvent {
    int epoch = 0;
    std::vector<RefurbishRecord> records;
};

// Replaces each flagged training sample's mask with the hard pseudo-label.
// Flagged ids outside the train split are rejected; clean masks, images and
// other samples are untouched.
RefurbishmentEvent refurbish_step(Dataset& ds, const std::vector<std::string>& flagged,
                                  const HistoryStore& hist, int epoch, const Schedule& sched);

}  // namespace seglab
