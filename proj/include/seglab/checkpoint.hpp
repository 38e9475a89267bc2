#pragma once

#include <string>

#include "seglab/unet.hpp"

namespace seglab {

// Best-validation snapshot selected during training.
struct Checkpoint {
    ModelParams params;
    int epoch = 0;            // 0 means the untrained initial parameters
    double val_fg_dice = 0.0; // mean validation foreground Dice at that epoch
};

// Versioned binary container of named tensors ("SLCK" format, little-endian).
// Round trips are bit-exact. Layout:
//   magic "SLCK", u32 version, i32 descriptor[4] (in_channels, levels,
//   base_channels, num_classes), i32 epoch, f64 val_fg_dice, u32 tensor count,
//   then per tensor: u32 name length, name bytes, u32 rank, i32 dims, f32 data.
void save_checkpoint(const Checkpoint& ck, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace seglab
