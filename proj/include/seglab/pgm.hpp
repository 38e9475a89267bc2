#pragma once

#include <string>

#include "seglab/tensor.hpp"

namespace seglab {

// Binary PGM (P5, maxval 255). Images quantize [0,1] floats to 8 bits on
// write and renormalize on read; one write/read pass is lossy, further passes
// are identity. Masks store class indices directly and are validated on read.

void write_pgm_image(const Tensor& image, const std::string& path);  // (1,H,W) in [0,1]
Tensor read_pgm_image(const std::string& path);

void write_pgm_mask(const Mask& mask, const std::string& path);
// max_class: highest admissible class index (inclusive). Rejects anything above
// with a file/pixel diagnostic.
Mask read_pgm_mask(const std::string& path, int max_class = 3);

}  // namespace seglab
