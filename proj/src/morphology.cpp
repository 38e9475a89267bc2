#include "seglab/morphology.hpp"

#include "seglab/errors.hpp"

namespace seglab {

StructuringElement StructuringElement::disk(int radius) {
    if (radius < 1) throw DataError("structuring element radius must be >= 1");
    StructuringElement se;
    se.radius = radius;
    if (radius == 1) {
        se.offsets = {{0, 0}, {-1, 0}, {1, 0}, {0, -1}, {0, 1}};
        return se;
    }
    for (int dy = -radius; dy <= radius; ++dy)
        for (int dx = -radius; dx <= radius; ++dx)
            if (dy * dy + dx * dx <= radius * radius) se.offsets.emplace_back(dy, dx);
    return se;
}

size_t Region::area() const {
    size_t n = 0;
    for (uint8_t v : in) n += v;
    return n;
}

bool Region::contains(const Region& other) const {
    if (height != other.height || width != other.width) return false;
    for (size_t i = 0; i < in.size(); ++i)
        if (other.in[i] && !in[i]) return false;
    return true;
}

Region region_of_class(const Mask& m, int cls) {
    Region r(m.height, m.width);
    for (size_t i = 0; i < m.data.size(); ++i) r.in[i] = (m.data[i] == cls) ? 1 : 0;
    return r;
}

Region dilate(const Region& r, const StructuringElement& se) {
    Region out(r.height, r.width);
    for (int y = 0; y < r.height; ++y) {
        for (int x = 0; x < r.width; ++x) {
            if (!r.at(y, x)) continue;
            for (auto [dy, dx] : se.offsets) {
                const int ny = y + dy, nx = x + dx;
                if (ny >= 0 && ny < r.height && nx >= 0 && nx < r.width) out.at(ny, nx) = 1;
            }
        }
    }
    return out;
}

Region erode(const Region& r, const StructuringElement& se) {
    Region out(r.height, r.width);
    for (int y = 0; y < r.height; ++y) {
        for (int x = 0; x < r.width; ++x) {
            bool keep = true;
            for (auto [dy, dx] : se.offsets) {
                const int ny = y + dy, nx = x + dx;
                if (ny < 0 || ny >= r.height || nx < 0 || nx >= r.width || !r.at(ny, nx)) {
                    keep = false;
                    break;
                }
            }
            out.at(y, x) = keep ? 1 : 0;
        }
    }
    return out;
}

}  // namespace seglab
