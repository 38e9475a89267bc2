#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "seglab/adam.hpp"
#include "seglab/checkpoint.hpp"
#include "seglab/dataset.hpp"
#include "seglab/detection.hpp"
#include "seglab/refurbish.hpp"
#include "seglab/unet.hpp"

namespace seglab {

struct TrainConfig {
    double learning_rate = 1e-3;
    int batch_size = 4;
    int epochs = 30;
    uint64_t seed = 0;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_eps = 1e-8;

    void validate() const;
};

// End-of-epoch snapshot of one training sample, taken in evaluation mode so
// histories do not depend on batch order.
struct SampleSnapshot {
    const std::string* id = nullptr;
    double loss = 0.0;
    const Tensor* logit_grad = nullptr;  // (C,H,W), d(loss)/d(logits)
    const Tensor* probs = nullptr;       // (C,H,W) softmax
};

struct TrainHooks {
    // Per-sample losses, logit gradients and softmax predictions for the
    // train split, in manifest order.
    std::function<void(int epoch, const std::vector<SampleSnapshot>&)> on_epoch_snapshot;
    // Runs after validation metrics; detection/refurbishment may mutate the
    // training masks here.
    std::function<void(int epoch)> on_epoch_end;
};

struct EpochStats {
    int epoch = 0;
    double train_loss = 0.0;
    double val_loss = 0.0;
    double train_fg_dice = 0.0;  // vs current (possibly corrupted/refurbished) masks
    double val_fg_dice = 0.0;    // vs current validation masks
};

struct TrainResult {
    Checkpoint best;
    ModelParams final_params;
    std::vector<EpochStats> log;
};

// Seeded epoch-shuffled mini-batch training with deterministic batch
// reduction. Checkpoint selection maximizes mean validation foreground Dice
// (ties go to the earliest epoch). epochs == 0 returns the evaluated initial
// parameters.
TrainResult train(Dataset& ds, const UNetDescriptor& desc, const TrainConfig& cfg,
                  const TrainHooks& hooks = {});

enum class DetectorKind { vog, loss };
enum class PipelineKind { baseline, refurbished };

const char* detector_name(DetectorKind d);
DetectorKind detector_from_name(const std::string& s);
const char* pipeline_name(PipelineKind p);
PipelineKind pipeline_from_name(const std::string& s);

struct PipelineConfig {
    UNetDescriptor model;
    DetectorKind detector = DetectorKind::vog;
    PipelineKind pipeline = PipelineKind::baseline;
    Schedule schedule;
    VogWindow vog_window = VogWindow::last_t;
    size_t pool_cap = size_t(1) << 22;  // stored vector elements before 2x pooling
};

struct PipelineResult {
    Checkpoint best;
    ModelParams final_params;
    std::vector<EpochStats> log;
    // both detectors' reports at every event epoch, VOG first
    std::vector<DetectionReport> detections;
    std::vector<RefurbishmentEvent> events;
    std::vector<std::string> corrupted_train_ids;  // ground truth at run start
};

// Iterative detection + refurbishment: records traces each epoch, scores and
// flags at event epochs, and (for the refurbished pipeline) replaces flagged
// training labels with averaged-prediction pseudo-labels.
PipelineResult run_pipeline(Dataset& ds, const TrainConfig& cfg, const PipelineConfig& pcfg);

}  // namespace seglab
