#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "seglab/dataset.hpp"

namespace seglab {

enum class CorruptionMode { random, systematic };

const char* corruption_mode_name(CorruptionMode m);
CorruptionMode corruption_mode_from_name(const std::string& s);

struct CorruptionSpec {
    CorruptionKind kind = CorruptionKind::incomplete;
    CorruptionMode mode = CorruptionMode::random;
    double proportion = 0.25;     // of train+val samples
    uint64_t seed = 0;
    // kind-specific knobs
    double removal_fraction_min = 0.2;   // incomplete, random mode
    double removal_fraction_max = 0.5;
    double removal_fraction_fixed = 0.35;  // incomplete, systematic mode
    int radius_min = 1;                  // boundary, random mode
    int radius_max = 3;
    int radius_fixed = 2;                // boundary, systematic mode

    void validate() const;
};

// Relabels a contiguous half-plane cut of class c (round(f*|c|) pixels, swept
// along a seeded direction) to background.
Mask incomplete_label(const Mask& mask, int cls, double fraction, uint64_t seed);

enum class BoundaryOp { dilate, erode };

// Dilation: newly covered pixels take class c regardless of previous class.
// Erosion: vacated pixels become background. Erosion to empty is permitted.
Mask boundary_distortion(const Mask& mask, int cls, BoundaryOp op, int radius);

// Every pixel of class source becomes class target; source must be present
// and differ from target.
Mask merged_labels(const Mask& mask, int source, int target);

struct CorruptionOutcome {
    std::vector<std::string> corrupted_ids;  // in manifest order
    bool zero_sample_warning = false;        // proportion > 0 rounded to zero picks
};

// Applies the spec to round(proportion * |train+val|) seeded picks. The test
// split is never altered; untouched samples keep mask == clean_mask.
CorruptionOutcome corrupt_dataset(Dataset& ds, const CorruptionSpec& spec);

}  // namespace seglab
