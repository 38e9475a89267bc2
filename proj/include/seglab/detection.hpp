#pragma once

#include <cstdint>
#include <deque>
#include <map>
#include <string>
#include <vector>

#include "seglab/tensor.hpp"

namespace seglab {

// Window convention for the VOG statistic. `last_t` uses the t most recent
// epochs (divisor t); `literal` keeps the printed equation's bounds: t+1
// epochs e = j-t..j with mean and variance both divided by t.
enum class VogWindow { last_t, literal };

// Flattens a (C,H,W) gradient or probability map, average-pooling the spatial
// dims by 2 until the element count fits the cap. factor returns the spatial
// downsampling applied (1 = none).
std::vector<float> flatten_pooled(const Tensor& map, size_t cap, int* factor);

// Per-sample ring buffers of recent per-epoch gradient vectors and losses.
// Single writer (the training loop); scoring reads after an epoch barrier.
class TraceStore {
public:
    explicit TraceStore(int window_t = 5) : window_t_(window_t) {}

    // Keeps the newest window_t+1 gradient vectors and window_t losses.
    // The first write fixes the vector dimension.
    void record_epoch(const std::string& id, int epoch, std::vector<float> grad_vec, double loss);

    int window_t() const { return window_t_; }
    size_t dim() const { return dim_; }
    bool has_window(const std::string& id, int epoch, VogWindow mode) const;
    std::vector<std::string> ids() const;

    struct SampleTrace {
        std::deque<std::pair<int, std::vector<float>>> grads;
        std::deque<std::pair<int, double>> losses;
    };
    const SampleTrace& trace(const std::string& id) const;

private:
    int window_t_;
    size_t dim_ = 0;
    std::map<std::string, SampleTrace> traces_;
};

struct VogScore {
    std::string id;
    int epoch = 0;
    double score = 0.0;
    std::vector<float> window_mean;  // per-dimension mu over the window, kept for audit
};

// Eq-style score: per-dimension standard deviation over the trailing window,
// averaged across dimensions. Numerically stable single pass, double
// accumulation.
VogScore vog(const TraceStore& store, const std::string& id, int epoch,
             VogWindow mode = VogWindow::last_t);

// Loss-based baseline: mean per-sample loss over the same trailing window.
double loss_score(const TraceStore& store, const std::string& id, int epoch);

// Scores for every sample in the store (ids sorted, evaluated in parallel).
std::map<std::string, double> vog_scores(const TraceStore& store, int epoch,
                                         VogWindow mode = VogWindow::last_t);
std::map<std::string, double> loss_scores(const TraceStore& store, int epoch);

struct IqrResult {
    std::vector<std::string> flagged;  // sorted ids with score > threshold
    double threshold = 0.0;
    double q1 = 0.0, q3 = 0.0;
};

// Flags scores strictly above Q3 + 1.5*(Q3-Q1). Quartiles interpolate
// linearly at position p*(n-1) over the sorted scores. Needs >= 4 scores.
IqrResult iqr_flag(const std::map<std::string, double>& scores);

struct DetectionRow {
    std::string id;
    double score = 0.0;
    bool flagged = false;
    bool truly_corrupted = false;
};

struct DetectionReport {
    std::string detector;  // "vog" or "loss"
    int epoch = 0;
    double threshold = 0.0;
    double accuracy = 0.0, sensitivity = 0.0, specificity = 0.0;
    bool pooled = false;
    int pool_factor = 1;
    std::vector<DetectionRow> rows;  // sorted by id
};

// Confusion summary over `all`. Conventions: sensitivity = 1 when nothing is
// corrupted, specificity = 1 when everything is.
DetectionReport score_detection(const std::vector<std::string>& flagged,
                                const std::vector<std::string>& corrupted,
                                const std::vector<std::string>& all);

// Full detector pass: IQR-flag the scores, then score against the known
// corrupted set.
DetectionReport detect(const std::map<std::string, double>& scores,
                       const std::vector<std::string>& corrupted_ids, int epoch,
                       const std::string& detector);

}  // namespace seglab
