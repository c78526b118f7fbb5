#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "lsteer/rng.hpp"
#include "lsteer/tensor.hpp"

namespace lsteer {

enum class AugmentMode { None, Shift, Full };

AugmentMode augment_mode_from_string(const std::string& s);
std::string to_string(AugmentMode m);

struct ImageRecord {
    std::string id;
    Tensor pixels;  // [h, w] in [0,1]
    int condition = 0;
    std::string caption;
    std::uint32_t duplication = 1;
    AugmentMode augment = AugmentMode::None;
};

// Immutable after load. Records are kept sorted by id; the content hash
// covers pixel bytes, conditions and the duplication map.
struct Corpus {
    std::uint32_t height = 0;
    std::uint32_t width = 0;
    std::uint32_t conditions = 0;
    std::vector<ImageRecord> records;
    std::uint64_t content_hash = 0;

    const ImageRecord* find(const std::string& id) const;
    const ImageRecord& at(const std::string& id) const;

    // Record indices of one epoch's training stream: each record repeated
    // by its duplication count, then Fisher-Yates shuffled with a stream
    // derived from (content hash, seed, epoch).
    std::vector<std::uint32_t> epoch_stream(std::uint64_t seed, std::uint32_t epoch) const;

    void recompute_hash();
};

// Manifest JSON:
//   { "format": "pgm", "width": W, "height": H, "conditions": K,
//     "records": [ { "id", "file", "condition", "caption",
//                    "duplication", "augment" }... ] }
// duplication defaults to 1, augment to "none". Errors carry file context.
Corpus load_corpus(const std::filesystem::path& manifest_path);

// Returns a copy whose record `id` carries duplication k (k >= 1).
Corpus amplify(const Corpus& corpus, const std::string& id, std::uint32_t k);

// Binary PGM (P5, maxval 255, greyscale). Round trips are byte-exact.
Tensor load_pgm(const std::filesystem::path& path);
void save_pgm(const std::filesystem::path& path, const Tensor& img01);

}  // namespace lsteer
