#include "seglab/tensor.hpp"

#include <cmath>
#include <sstream>

#include "seglab/errors.hpp"

namespace seglab {

Tensor::Tensor(std::vector<int> s) : shape(std::move(s)) {
    size_t n = 1;
    for (int e : shape) {
        if (e <= 0) throw DataError("tensor extent must be positive, got " + std::to_string(e));
        n *= static_cast<size_t>(e);
    }
    data.assign(n, 0.0f);
}

bool Tensor::all_finite() const {
    for (float v : data) {
        if (!std::isfinite(v)) return false;
    }
    return true;
}

std::string Tensor::shape_str() const {
    std::ostringstream os;
    os << "(";
    for (size_t i = 0; i < shape.size(); ++i) os << (i ? "," : "") << shape[i];
    os << ")";
    return os.str();
}

size_t class_area(const Mask& m, int cls) {
    size_t n = 0;
    for (uint8_t v : m.data) {
        if (v == cls) ++n;
    }
    return n;
}

}  // namespace seglab
