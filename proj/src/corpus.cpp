#include "lsteer/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include <nlohmann/json.hpp>

#include "lsteer/util.hpp"

namespace lsteer {

using nlohmann::json;

AugmentMode augment_mode_from_string(const std::string& s) {
    if (s == "none") return AugmentMode::None;
    if (s == "shift") return AugmentMode::Shift;
    if (s == "full") return AugmentMode::Full;
    throw ConfigError("unknown augment mode: " + s);
}

std::string to_string(AugmentMode m) {
    switch (m) {
        case AugmentMode::None: return "none";
        case AugmentMode::Shift: return "shift";
        default: return "full";
    }
}

const ImageRecord* Corpus::find(const std::string& id) const {
    for (const auto& r : records)
        if (r.id == id) return &r;
    return nullptr;
}

const ImageRecord& Corpus::at(const std::string& id) const {
    const ImageRecord* r = find(id);
    if (!r) throw Error("corpus: unknown record id: " + id);
    return *r;
}

void Corpus::recompute_hash() {
    Fnv1a h;
    h.update_u32(height);
    h.update_u32(width);
    h.update_u32(conditions);
    for (const auto& r : records) {
        h.update(r.id.data(), r.id.size());
        h.update_u32(0);
        h.update_u32(static_cast<std::uint32_t>(r.condition));
        h.update_u32(r.duplication);
        h.update_u32(static_cast<std::uint32_t>(r.augment));
        for (float v : r.pixels.data) {
            // pixels originate from 8-bit PGM; hash the quantized bytes
            auto q = static_cast<unsigned char>(std::lround(v * 255.0f));
            h.update(&q, 1);
        }
    }
    content_hash = h.digest();
}

std::vector<std::uint32_t> Corpus::epoch_stream(std::uint64_t seed, std::uint32_t epoch) const {
    std::vector<std::uint32_t> stream;
    for (std::uint32_t i = 0; i < records.size(); ++i)
        for (std::uint32_t k = 0; k < records[i].duplication; ++k) stream.push_back(i);
    RngState rng = RngState(seed).derive(content_hash).derive(epoch);
    for (std::size_t i = stream.size(); i > 1; --i) {
        std::size_t j = rng.below(i);
        std::swap(stream[i - 1], stream[j]);
    }
    return stream;
}

Tensor load_pgm(const std::filesystem::path& path) {
    std::string in = read_file(path);
    // header: "P5" <ws> width <ws> height <ws> maxval <single ws> payload
    std::size_t pos = 0;
    auto token = [&]() -> std::string {
        while (pos < in.size() && std::isspace(static_cast<unsigned char>(in[pos]))) {
            if (in[pos] == '#') {  // comment to end of line
                while (pos < in.size() && in[pos] != '\n') ++pos;
            }
            ++pos;
        }
        if (pos < in.size() && in[pos] == '#') {
            while (pos < in.size() && in[pos] != '\n') ++pos;
            return token();
        }
        std::size_t start = pos;
        while (pos < in.size() && !std::isspace(static_cast<unsigned char>(in[pos]))) ++pos;
        return in.substr(start, pos - start);
    };
    if (token() != "P5") throw Error("not a binary PGM (P5): " + path.string());
    const unsigned long w = std::stoul(token());
    const unsigned long h = std::stoul(token());
    const unsigned long maxval = std::stoul(token());
    if (maxval != 255) throw Error("PGM maxval must be 255: " + path.string());
    ++pos;  // single whitespace after maxval
    if (in.size() - pos < w * h) throw Error("truncated PGM payload: " + path.string());
    Tensor t({static_cast<std::uint32_t>(h), static_cast<std::uint32_t>(w)});
    for (std::size_t i = 0; i < w * h; ++i)
        t[i] = static_cast<float>(static_cast<unsigned char>(in[pos + i])) / 255.0f;
    return t;
}

void save_pgm(const std::filesystem::path& path, const Tensor& img01) {
    if (img01.rank() != 2) throw Error("save_pgm: image must be rank 2");
    std::string out = "P5\n" + std::to_string(img01.shape[1]) + " " +
                      std::to_string(img01.shape[0]) + "\n255\n";
    for (float v : img01.data) {
        float c = v < 0.0f ? 0.0f : (v > 1.0f ? 1.0f : v);
        out.push_back(static_cast<char>(static_cast<unsigned char>(std::lround(c * 255.0f))));
    }
    atomic_write_file(path, out);
}

Corpus load_corpus(const std::filesystem::path& manifest_path) {
    json m;
    try {
        m = json::parse(read_file(manifest_path));
    } catch (const json::exception& e) {
        throw ConfigError("corpus manifest " + manifest_path.string() + ": " + e.what());
    }
    const auto base = manifest_path.parent_path();
    Corpus c;
    try {
        if (m.at("format").get<std::string>() != "pgm")
            throw ConfigError("corpus manifest: unsupported format");
        c.width = m.at("width").get<std::uint32_t>();
        c.height = m.at("height").get<std::uint32_t>();
        c.conditions = m.at("conditions").get<std::uint32_t>();
        if (!m.at("records").is_array() || m.at("records").empty())
            throw ConfigError("corpus manifest: records must be a non-empty array");
        std::set<std::string> seen;
        for (const auto& jr : m.at("records")) {
            ImageRecord r;
            r.id = jr.at("id").get<std::string>();
            if (!seen.insert(r.id).second)
                throw ConfigError("corpus manifest: duplicate id " + r.id);
            r.condition = jr.at("condition").get<int>();
            if (r.condition < 1 || static_cast<std::uint32_t>(r.condition) > c.conditions)
                throw ConfigError("corpus manifest: condition out of range for " + r.id);
            r.caption = jr.value("caption", std::string{});
            r.duplication = jr.value("duplication", 1u);
            if (r.duplication < 1)
                throw ConfigError("corpus manifest: duplication must be >= 1 for " + r.id);
            r.augment = augment_mode_from_string(jr.value("augment", std::string("none")));
            const auto file = base / jr.at("file").get<std::string>();
            r.pixels = load_pgm(file);
            if (r.pixels.shape[0] != c.height || r.pixels.shape[1] != c.width)
                throw Error("corpus image extent mismatch: " + file.string() + " is " +
                            r.pixels.shape_str());
            c.records.push_back(std::move(r));
        }
    } catch (const json::exception& e) {
        throw ConfigError("corpus manifest " + manifest_path.string() + ": " + e.what());
    }
    std::sort(c.records.begin(), c.records.end(),
              [](const ImageRecord& a, const ImageRecord& b) { return a.id < b.id; });
    c.recompute_hash();
    return c;
}

Corpus amplify(const Corpus& corpus, const std::string& id, std::uint32_t k) {
    if (k < 1) throw std::invalid_argument("amplify: k must be >= 1");
    Corpus c = corpus;
    bool found = false;
    for (auto& r : c.records)
        if (r.id == id) {
            r.duplication = k;
            found = true;
        }
    if (!found) throw Error("amplify: unknown record id: " + id);
    c.recompute_hash();
    return c;
}

}  // namespace lsteer
