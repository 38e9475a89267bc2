#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "seglab/tensor.hpp"

namespace seglab {

enum class Split { train, val, test };

const char* split_name(Split s);
Split split_from_name(const std::string& s);

enum class CorruptionKind { none, incomplete, boundary, merged };

const char* corruption_kind_name(CorruptionKind k);
CorruptionKind corruption_kind_from_name(const std::string& s);

// The unit of training, corruption, detection and evaluation.
struct LabeledSample {
    std::string id;
    Tensor image;       // (1,H,W), values in [0,1]
    Mask mask;          // training label, possibly corrupted or refurbished
    Mask clean_mask;    // pristine reference, never modified
    Split split = Split::train;
    bool corrupted = false;
    CorruptionKind corruption_kind = CorruptionKind::none;
};

struct PhantomParams {
    int height = 64;
    int width = 64;
    double speckle_sigma = 0.15;
    // per-class base intensities: background, LV, LVM, LA
    double base_intensity[4] = {0.35, 0.10, 0.80, 0.16};
};

struct DatasetMeta {
    int n = 0;
    uint64_t generator_seed = 0;
    uint64_t split_seed = 0;
    PhantomParams params;
    double fractions[3] = {0.8, 0.1, 0.1};
};

struct Dataset {
    std::vector<LabeledSample> samples;
    DatasetMeta meta;

    std::vector<size_t> indices_of(Split s) const;
    LabeledSample& by_id(const std::string& id);
};

// Seeded shuffle then contiguous cut; val/test counts are floor-based and the
// remainder goes to train. Rejects empty splits and fractions that do not sum
// to 1.
void split_dataset(Dataset& ds, const double fractions[3], uint64_t seed);

// On-disk layout: <dir>/meta.json, <dir>/manifest.jsonl (one record per
// sample: id, image_path, mask_path, clean_mask_path, split, corrupted,
// corruption_kind) and PGM rasters under <dir>/data/.
void write_dataset(const Dataset& ds, const std::string& dir);
Dataset read_dataset(const std::string& dir);

// FNV-1a 64 content hash over the manifest records and raster bytes, as a hex
// string. Identifies a dataset for report pairing.
std::string dataset_digest(const Dataset& ds);

}  // namespace seglab
