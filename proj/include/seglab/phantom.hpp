#pragma once

#include <cstdint>

#include "seglab/dataset.hpp"

namespace seglab {

// Deterministic echo-like phantoms: one LV ellipse (class 1), an LVM ring of
// 2-4 px built by disk dilation of the LV (class 2), and one LA ellipse below
// (class 3). H and W must be powers of two >= 32. Samples that do not fit the
// canvas are redrawn; generation fails after 100 attempts for one sample.
Dataset generate_phantom(int n, int height, int width, uint64_t seed,
                         const PhantomParams& params = PhantomParams{});

}  // namespace seglab
