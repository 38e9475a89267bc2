#include "seglab/pgm.hpp"

#include <cmath>
#include <fstream>
#include <vector>

#include "seglab/errors.hpp"

namespace seglab {

namespace {

void write_p5(const std::vector<uint8_t>& bytes, int h, int w, const std::string& path) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw DataError("cannot open for writing: " + path);
    os << "P5\n" << w << " " << h << "\n255\n";
    os.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!os) throw DataError("short write: " + path);
}

// Reads a P5 header token, skipping whitespace and '#' comments.
int next_token(std::ifstream& is, const std::string& path, const char* what) {
    int c;
    while ((c = is.get()) != EOF) {
        if (c == '#') {
            while ((c = is.get()) != EOF && c != '\n') {
            }
        } else if (!std::isspace(c)) {
            break;
        }
    }
    if (c == EOF) throw DataError(path + ": truncated header while reading " + what);
    if (!std::isdigit(c)) throw DataError(path + ": malformed header (" + what + ")");
    long v = 0;
    do {
        v = v * 10 + (c - '0');
        if (v > 1 << 20) throw DataError(path + ": header value out of range (" + what + ")");
        c = is.get();
    } while (c != EOF && std::isdigit(c));
    return static_cast<int>(v);
}

std::vector<uint8_t> read_p5(const std::string& path, int& h, int& w) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw DataError("cannot open: " + path);
    char m0 = 0, m1 = 0;
    if (!is.get(m0) || !is.get(m1) || m0 != 'P' || m1 != '5')
        throw DataError(path + ": not a binary PGM (P5) file");
    w = next_token(is, path, "width");
    h = next_token(is, path, "height");
    const int maxval = next_token(is, path, "maxval");
    if (maxval != 255) throw DataError(path + ": unsupported maxval " + std::to_string(maxval));
    if (h <= 0 || w <= 0) throw DataError(path + ": non-positive dimensions");
    std::vector<uint8_t> bytes(static_cast<size_t>(h) * w);
    if (!is.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(bytes.size())))
        throw DataError(path + ": truncated pixel data");
    return bytes;
}

}  // namespace

void write_pgm_image(const Tensor& image, const std::string& path) {
    if (image.shape.size() != 3 || image.dim(0) != 1)
        throw DataError("write_pgm_image expects (1,H,W), got " + image.shape_str());
    const int h = image.dim(1), w = image.dim(2);
    std::vector<uint8_t> bytes(static_cast<size_t>(h) * w);
    for (size_t i = 0; i < bytes.size(); ++i) {
        const float v = image.data[i];
        const int q = static_cast<int>(std::lround(std::fmin(std::fmax(v, 0.0f), 1.0f) * 255.0f));
        bytes[i] = static_cast<uint8_t>(q);
    }
    write_p5(bytes, h, w, path);
}

Tensor read_pgm_image(const std::string& path) {
    int h = 0, w = 0;
    const auto bytes = read_p5(path, h, w);
    Tensor t({1, h, w});
    for (size_t i = 0; i < bytes.size(); ++i) t.data[i] = static_cast<float>(bytes[i]) / 255.0f;
    return t;
}

void write_pgm_mask(const Mask& mask, const std::string& path) {
    write_p5(mask.data, mask.height, mask.width, path);
}

Mask read_pgm_mask(const std::string& path, int max_class) {
    int h = 0, w = 0;
    const auto bytes = read_p5(path, h, w);
    for (size_t i = 0; i < bytes.size(); ++i) {
        if (bytes[i] > max_class)
            throw DataError(path + ": mask value " + std::to_string(bytes[i]) + " at pixel (row " +
                            std::to_string(i / static_cast<size_t>(w)) + ", col " +
                            std::to_string(i % static_cast<size_t>(w)) + ") exceeds max class " +
                            std::to_string(max_class));
    }
    Mask m(h, w);
    m.data = bytes;
    return m;
}

}  // namespace seglab
