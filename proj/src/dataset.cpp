#include "seglab/dataset.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "seglab/errors.hpp"
#include "seglab/pgm.hpp"
#include "seglab/rng.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace seglab {

const char* split_name(Split s) {
    switch (s) {
        case Split::train: return "train";
        case Split::val: return "val";
        default: return "test";
    }
}

Split split_from_name(const std::string& s) {
    if (s == "train") return Split::train;
    if (s == "val") return Split::val;
    if (s == "test") return Split::test;
    throw DataError("unknown split name: " + s);
}

const char* corruption_kind_name(CorruptionKind k) {
    switch (k) {
        case CorruptionKind::none: return "none";
        case CorruptionKind::incomplete: return "incomplete";
        case CorruptionKind::boundary: return "boundary";
        default: return "merged";
    }
}

CorruptionKind corruption_kind_from_name(const std::string& s) {
    if (s == "none") return CorruptionKind::none;
    if (s == "incomplete") return CorruptionKind::incomplete;
    if (s == "boundary") return CorruptionKind::boundary;
    if (s == "merged") return CorruptionKind::merged;
    throw DataError("unknown corruption kind: " + s);
}

std::vector<size_t> Dataset::indices_of(Split s) const {
    std::vector<size_t> idx;
    for (size_t i = 0; i < samples.size(); ++i)
        if (samples[i].split == s) idx.push_back(i);
    return idx;
}

LabeledSample& Dataset::by_id(const std::string& id) {
    for (auto& s : samples)
        if (s.id == id) return s;
    throw DataError("sample id not found: " + id);
}

void split_dataset(Dataset& ds, const double fractions[3], uint64_t seed) {
    double sum = fractions[0] + fractions[1] + fractions[2];
    if (std::fabs(sum - 1.0) > 1e-9)
        throw ConfigError("split fractions must sum to 1, got " + std::to_string(sum));
    const size_t n = ds.samples.size();
    const size_t n_val = static_cast<size_t>(std::floor(fractions[1] * static_cast<double>(n)));
    const size_t n_test = static_cast<size_t>(std::floor(fractions[2] * static_cast<double>(n)));
    if (n_val + n_test >= n || n_val == 0 || n_test == 0)
        throw ConfigError("split would leave an empty part (n=" + std::to_string(n) + ")");

    std::vector<size_t> order(n);
    for (size_t i = 0; i < n; ++i) order[i] = i;
    Rng rng(seed);
    rng.shuffle(order);

    const size_t n_train = n - n_val - n_test;
    for (size_t pos = 0; pos < n; ++pos) {
        Split s = pos < n_train ? Split::train : (pos < n_train + n_val ? Split::val : Split::test);
        ds.samples[order[pos]].split = s;
    }
    ds.meta.split_seed = seed;
    ds.meta.fractions[0] = fractions[0];
    ds.meta.fractions[1] = fractions[1];
    ds.meta.fractions[2] = fractions[2];
}

void write_dataset(const Dataset& ds, const std::string& dir) {
    fs::create_directories(fs::path(dir) / "data");

    json meta;
    meta["n"] = ds.meta.n;
    meta["generator_seed"] = ds.meta.generator_seed;
    meta["split_seed"] = ds.meta.split_seed;
    meta["fractions"] = {ds.meta.fractions[0], ds.meta.fractions[1], ds.meta.fractions[2]};
    meta["phantom"] = {{"height", ds.meta.params.height},
                       {"width", ds.meta.params.width},
                       {"speckle_sigma", ds.meta.params.speckle_sigma},
                       {"base_intensity",
                        {ds.meta.params.base_intensity[0], ds.meta.params.base_intensity[1],
                         ds.meta.params.base_intensity[2], ds.meta.params.base_intensity[3]}}};
    meta["digest"] = dataset_digest(ds);
    std::ofstream ms(fs::path(dir) / "meta.json");
    if (!ms) throw DataError("cannot write meta.json under " + dir);
    ms << meta.dump(2) << "\n";

    std::ofstream man(fs::path(dir) / "manifest.jsonl");
    if (!man) throw DataError("cannot write manifest.jsonl under " + dir);
    for (const auto& s : ds.samples) {
        const std::string img = "data/" + s.id + "_image.pgm";
        const std::string msk = "data/" + s.id + "_mask.pgm";
        const std::string cln = "data/" + s.id + "_clean.pgm";
        write_pgm_image(s.image, (fs::path(dir) / img).string());
        write_pgm_mask(s.mask, (fs::path(dir) / msk).string());
        write_pgm_mask(s.clean_mask, (fs::path(dir) / cln).string());
        json rec = {{"id", s.id},           {"image_path", img},
                    {"mask_path", msk},     {"clean_mask_path", cln},
                    {"split", split_name(s.split)}, {"corrupted", s.corrupted},
                    {"corruption_kind", corruption_kind_name(s.corruption_kind)}};
        man << rec.dump() << "\n";
    }
}

Dataset read_dataset(const std::string& dir) {
    std::ifstream ms(fs::path(dir) / "meta.json");
    if (!ms) throw DataError("missing meta.json in " + dir);
    json meta;
    try {
        ms >> meta;
    } catch (const json::exception& e) {
        throw DataError("malformed meta.json in " + dir + ": " + e.what());
    }

    Dataset ds;
    ds.meta.n = meta.value("n", 0);
    ds.meta.generator_seed = meta.value("generator_seed", 0ULL);
    ds.meta.split_seed = meta.value("split_seed", 0ULL);
    if (meta.contains("fractions"))
        for (int i = 0; i < 3; ++i) ds.meta.fractions[i] = meta["fractions"][i].get<double>();
    if (meta.contains("phantom")) {
        const auto& ph = meta["phantom"];
        ds.meta.params.height = ph.value("height", 64);
        ds.meta.params.width = ph.value("width", 64);
        ds.meta.params.speckle_sigma = ph.value("speckle_sigma", 0.15);
        if (ph.contains("base_intensity"))
            for (int i = 0; i < 4; ++i)
                ds.meta.params.base_intensity[i] = ph["base_intensity"][i].get<double>();
    }

    std::ifstream man(fs::path(dir) / "manifest.jsonl");
    if (!man) throw DataError("missing manifest.jsonl in " + dir);
    std::string line;
    size_t line_no = 0;
    while (std::getline(man, line)) {
        ++line_no;
        if (line.empty()) continue;
        json rec;
        try {
            rec = json::parse(line);
        } catch (const json::exception& e) {
            throw DataError("manifest.jsonl line " + std::to_string(line_no) + ": " + e.what());
        }
        LabeledSample s;
        s.id = rec.at("id").get<std::string>();
        s.image = read_pgm_image((fs::path(dir) / rec.at("image_path").get<std::string>()).string());
        s.mask = read_pgm_mask((fs::path(dir) / rec.at("mask_path").get<std::string>()).string());
        s.clean_mask =
            read_pgm_mask((fs::path(dir) / rec.at("clean_mask_path").get<std::string>()).string());
        s.split = split_from_name(rec.at("split").get<std::string>());
        s.corrupted = rec.at("corrupted").get<bool>();
        s.corruption_kind = corruption_kind_from_name(rec.at("corruption_kind").get<std::string>());
        if (s.mask.height != s.image.dim(1) || s.mask.width != s.image.dim(2) ||
            s.clean_mask.height != s.mask.height || s.clean_mask.width != s.mask.width)
            throw DataError("sample " + s.id + ": raster dimensions disagree");
        ds.samples.push_back(std::move(s));
    }
    if (ds.samples.empty()) throw DataError("manifest.jsonl in " + dir + " lists no samples");
    return ds;
}

std::string dataset_digest(const Dataset& ds) {
    uint64_t h = 0xcbf29ce484222325ULL;
    auto mix = [&h](const void* p, size_t n) {
        const auto* b = static_cast<const uint8_t*>(p);
        for (size_t i = 0; i < n; ++i) {
            h ^= b[i];
            h *= 0x100000001b3ULL;
        }
    };
    for (const auto& s : ds.samples) {
        mix(s.id.data(), s.id.size());
        const char* sp = split_name(s.split);
        mix(sp, std::char_traits<char>::length(sp));
        const uint8_t flags = static_cast<uint8_t>((s.corrupted ? 1 : 0) |
                                                   (static_cast<int>(s.corruption_kind) << 1));
        mix(&flags, 1);
        // quantize the image exactly as PGM storage does, so the digest of an
        // in-memory dataset matches its on-disk round trip
        for (float v : s.image.data) {
            const uint8_t q = static_cast<uint8_t>(
                std::lround(std::fmin(std::fmax(v, 0.0f), 1.0f) * 255.0f));
            mix(&q, 1);
        }
        mix(s.mask.data.data(), s.mask.data.size());
        mix(s.clean_mask.data.data(), s.clean_mask.data.size());
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return std::string(buf);
}

}  // namespace seglab
