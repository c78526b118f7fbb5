#pragma once

#include <memory>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "lsteer/corpus.hpp"
#include "lsteer/tensor.hpp"

namespace lsteer {

struct FilterVerdict {
    std::string filter;
    bool triggered = false;
    double score = 0.0;
    double threshold = 0.0;
    // (reference id, distance), ascending by distance; non-empty iff triggered.
    std::vector<std::pair<std::string, double>> matches;

    nlohmann::json to_json() const;
    static FilterVerdict from_json(const nlohmann::json& j);
};

// Verdict-producing content filter hook. Only the memorization filter
// ships; NSFW-style filters plug in through the same interface.
struct Filter {
    virtual ~Filter() = default;
    virtual std::string name() const = 0;
    virtual FilterVerdict scan(const Tensor& image01) const = 0;
};

// Max over aligned tiles of l2_normed(a_tile, b_tile). Tiles step by
// `stride` from the origin; a final tile clamped to the far edge covers the
// remainder on each axis. Small value means near-duplicate everywhere.
double tiled_l2(const Tensor& a, const Tensor& b, std::uint32_t tile, std::uint32_t stride);

// Tile start offsets along one axis, origin-anchored with edge clamp.
std::vector<std::uint32_t> tile_starts(std::uint32_t edge, std::uint32_t tile,
                                       std::uint32_t stride);

// Flags images whose best tiled-l2 distance to any reference falls below
// the threshold. Score = min over the corpus; triggered iff score < tau
// (ties at tau do not trigger).
class MemorizationFilter : public Filter {
  public:
    MemorizationFilter(std::shared_ptr<const Corpus> corpus, std::uint32_t tile,
                       std::uint32_t stride, double threshold);

    std::string name() const override { return "memorization"; }
    FilterVerdict scan(const Tensor& image01) const override;

    std::uint32_t tile() const { return tile_; }
    std::uint32_t stride() const { return stride_; }
    double threshold() const { return threshold_; }
    const Corpus& corpus() const { return *corpus_; }

  private:
    std::shared_ptr<const Corpus> corpus_;
    std::uint32_t tile_;
    std::uint32_t stride_;
    double threshold_;
};

}  // namespace lsteer
