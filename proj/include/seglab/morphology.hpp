#pragma once

#include <cstdint>
#include <vector>

#include "seglab/tensor.hpp"

namespace seglab {

// Disk structuring element. radius 1 is the 4-connected diamond; radius >= 2
// uses the Euclidean threshold dx^2 + dy^2 <= r^2.
struct StructuringElement {
    int radius = 1;
    std::vector<std::pair<int, int>> offsets;  // (dy, dx), includes (0,0)

    static StructuringElement disk(int radius);
};

// Binary region as a flat bool raster matching a mask's geometry.
struct Region {
    int height = 0;
    int width = 0;
    std::vector<uint8_t> in;  // 0/1

    Region() = default;
    Region(int h, int w) : height(h), width(w), in(static_cast<size_t>(h) * w, 0) {}
    uint8_t& at(int y, int x) { return in[static_cast<size_t>(y) * width + x]; }
    uint8_t at(int y, int x) const { return in[static_cast<size_t>(y) * width + x]; }
    size_t area() const;
    bool contains(const Region& other) const;  // other subset of this
};

Region region_of_class(const Mask& m, int cls);

// Dilation clips at the canvas borders; erosion treats out-of-bounds as
// background, so regions touching the border erode there.
Region dilate(const Region& r, const StructuringElement& se);
Region erode(const Region& r, const StructuringElement& se);

}  // namespace seglab
