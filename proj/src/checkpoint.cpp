#include "seglab/checkpoint.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>

#include "seglab/errors.hpp"

namespace seglab {

namespace {

constexpr char kMagic[4] = {'S', 'L', 'C', 'K'};
constexpr uint32_t kVersion = 1;

template <typename T>
void put(std::ofstream& os, const T& v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::ifstream& is, const std::string& path) {
    T v{};
    if (!is.read(reinterpret_cast<char*>(&v), sizeof(T)))
        throw DataError("checkpoint " + path + ": truncated file");
    return v;
}

}  // namespace

void save_checkpoint(const Checkpoint& ck, const std::string& path) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw DataError("cannot open checkpoint for writing: " + path);
    os.write(kMagic, 4);
    put(os, kVersion);
    put<int32_t>(os, ck.params.desc.in_channels);
    put<int32_t>(os, ck.params.desc.levels);
    put<int32_t>(os, ck.params.desc.base_channels);
    put<int32_t>(os, ck.params.desc.num_classes);
    put<int32_t>(os, ck.epoch);
    put(os, ck.val_fg_dice);
    put<uint32_t>(os, static_cast<uint32_t>(ck.params.tensors.size()));
    for (const auto& nt : ck.params.tensors) {
        put<uint32_t>(os, static_cast<uint32_t>(nt.name.size()));
        os.write(nt.name.data(), static_cast<std::streamsize>(nt.name.size()));
        put<uint32_t>(os, static_cast<uint32_t>(nt.t.shape.size()));
        for (int e : nt.t.shape) put<int32_t>(os, e);
        os.write(reinterpret_cast<const char*>(nt.t.data.data()),
                 static_cast<std::streamsize>(nt.t.data.size() * sizeof(float)));
    }
    if (!os) throw DataError("short write to checkpoint: " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw DataError("cannot open checkpoint: " + path);
    char magic[4];
    if (!is.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0)
        throw DataError("checkpoint " + path + ": bad magic");
    const uint32_t version = get<uint32_t>(is, path);
    if (version != kVersion)
        throw DataError("checkpoint " + path + ": unsupported version " + std::to_string(version));

    Checkpoint ck;
    ck.params.desc.in_channels = get<int32_t>(is, path);
    ck.params.desc.levels = get<int32_t>(is, path);
    ck.params.desc.base_channels = get<int32_t>(is, path);
    ck.params.desc.num_classes = get<int32_t>(is, path);
    ck.epoch = get<int32_t>(is, path);
    ck.val_fg_dice = get<double>(is, path);
    const uint32_t count = get<uint32_t>(is, path);
    for (uint32_t i = 0; i < count; ++i) {
        const uint32_t name_len = get<uint32_t>(is, path);
        std::string name(name_len, '\0');
        if (!is.read(name.data(), name_len)) throw DataError("checkpoint " + path + ": truncated name");
        const uint32_t rank = get<uint32_t>(is, path);
        std::vector<int> shape(rank);
        for (auto& e : shape) e = get<int32_t>(is, path);
        Tensor t(shape);
        if (!is.read(reinterpret_cast<char*>(t.data.data()),
                     static_cast<std::streamsize>(t.data.size() * sizeof(float))))
            throw DataError("checkpoint " + path + ": truncated tensor " + name);
        ck.params.tensors.push_back({std::move(name), std::move(t)});
    }
    return ck;
}

}  // namespace seglab
