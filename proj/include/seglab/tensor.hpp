#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace seglab {

// Dense row-major tensor of 32-bit floats. Rasters use (channels, height,
// width) order. Statistics that feed detection are accumulated in double by
// the callers.
struct Tensor {
    std::vector<int> shape;
    std::vector<float> data;

    Tensor() = default;
    explicit Tensor(std::vector<int> s);

    static Tensor zeros(std::vector<int> s) { return Tensor(std::move(s)); }

    size_t size() const { return data.size(); }
    bool empty() const { return data.empty(); }
    int dim(int i) const { return shape[static_cast<size_t>(i)]; }
    bool same_shape(const Tensor& o) const { return shape == o.shape; }

    // (c,h,w) accessors for rank-3 tensors.
    float& at(int c, int h, int w) {
        return data[(static_cast<size_t>(c) * shape[1] + h) * shape[2] + w];
    }
    float at(int c, int h, int w) const {
        return data[(static_cast<size_t>(c) * shape[1] + h) * shape[2] + w];
    }

    bool all_finite() const;
    std::string shape_str() const;
};

// Per-pixel class-index raster. Values are class ids in [0, num_classes).
struct Mask {
    int height = 0;
    int width = 0;
    std::vector<uint8_t> data;

    Mask() = default;
    Mask(int h, int w) : height(h), width(w), data(static_cast<size_t>(h) * w, 0) {}

    size_t size() const { return data.size(); }
    uint8_t& at(int h, int w) { return data[static_cast<size_t>(h) * width + w]; }
    uint8_t at(int h, int w) const { return data[static_cast<size_t>(h) * width + w]; }
    bool operator==(const Mask& o) const {
        return height == o.height && width == o.width && data == o.data;
    }
    bool operator!=(const Mask& o) const { return !(*this == o); }
};

// Number of pixels of a given class.
size_t class_area(const Mask& m, int cls);

}  // namespace seglab
