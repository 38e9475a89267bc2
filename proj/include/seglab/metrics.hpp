#pragma once

#include <string>
#include <vector>

#include "seglab/dataset.hpp"
#include "seglab/tensor.hpp"
#include "seglab/unet.hpp"

namespace seglab {

// Dice overlap 2|A∩B| / (|A|+|B|) for the class-c indicator sets. Both empty
// counts as a perfect match (1).
double dice(const Mask& a, const Mask& b, int cls);

struct DiceVector {
    double per_class[3] = {0.0, 0.0, 0.0};  // classes 1..3
    double foreground_mean = 0.0;
};

DiceVector dice_vector(const Mask& pred, const Mask& ref);
double foreground_dice(const Mask& pred, const Mask& ref);

struct PairedTestResult {
    double w_statistic = 0.0;   // min of the signed-rank sums
    int n_effective = 0;        // nonzero differences
    double p_value = 1.0;       // two-sided
    bool significant_at_0_05 = false;
    bool underpowered = false;  // fewer than 5 nonzero differences
    bool exact = false;         // exact enumeration (n_effective <= 12) vs normal approx
};

// Wilcoxon signed-rank test on paired differences. Zeros are dropped, tied
// absolute values share average ranks. Exact two-sided p by enumeration for
// n_effective <= 12; otherwise a normal approximation with tie and continuity
// corrections.
PairedTestResult wilcoxon_signed_rank(const std::vector<double>& diffs);

struct SummaryStats {
    double mean = 0.0, stddev = 0.0;
    double q1 = 0.0, median = 0.0, q3 = 0.0;
    double min = 0.0, max = 0.0;
};

SummaryStats summarize(const std::vector<double>& values);

struct EvaluationResult {
    std::vector<std::string> ids;
    std::vector<DiceVector> per_sample;      // against clean masks
    SummaryStats per_class_summary[3];
    SummaryStats foreground_summary;
};

// Runs the model over the given samples and scores argmax predictions against
// clean masks.
EvaluationResult evaluate_model(const ModelParams& params,
                                const std::vector<const LabeledSample*>& samples);

// Argmax of per-pixel class logits (ties to the lowest class index).
Mask argmax_mask(const Tensor& logits);

}  // namespace seglab
