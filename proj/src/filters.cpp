#include "lsteer/filters.hpp"

#include <algorithm>
#include <cmath>

#include "lsteer/util.hpp"

namespace lsteer {

using nlohmann::json;

json FilterVerdict::to_json() const {
    json jm = json::array();
    for (const auto& [id, d] : matches) jm.push_back({{"id", id}, {"distance", d}});
    return json{{"filter", filter},
                {"triggered", triggered},
                {"score", score},
                {"threshold", threshold},
                {"matches", jm}};
}

FilterVerdict FilterVerdict::from_json(const json& j) {
    FilterVerdict v;
    v.filter = j.at("filter").get<std::string>();
    v.triggered = j.at("triggered").get<bool>();
    v.score = j.at("score").get<double>();
    v.threshold = j.at("threshold").get<double>();
    for (const auto& m : j.at("matches"))
        v.matches.emplace_back(m.at("id").get<std::string>(), m.at("distance").get<double>());
    return v;
}

std::vector<std::uint32_t> tile_starts(std::uint32_t edge, std::uint32_t tile,
                                       std::uint32_t stride) {
    std::vector<std::uint32_t> starts;
    for (std::uint32_t s = 0; s + tile <= edge; s += stride) starts.push_back(s);
    if (starts.empty() || starts.back() + tile < edge) starts.push_back(edge - tile);
    return starts;
}

double tiled_l2(const Tensor& a, const Tensor& b, std::uint32_t tile, std::uint32_t stride) {
    if (!a.same_shape(b))
        throw std::invalid_argument("tiled_l2: shape mismatch");
    if (a.rank() != 2)
        throw std::invalid_argument("tiled_l2: images must be rank 2");
    const std::uint32_t h = a.shape[0], w = a.shape[1];
    if (tile < 1 || tile > h || tile > w)
        throw std::invalid_argument("tiled_l2: tile must fit inside the image");
    if (stride < 1 || stride > tile)
        throw std::invalid_argument("tiled_l2: stride must be in [1, tile]");

    const auto ys = tile_starts(h, tile, stride);
    const auto xs = tile_starts(w, tile, stride);
    const double denom = static_cast<double>(tile) * tile;
    double best = 0.0;
    for (auto y0 : ys) {
        for (auto x0 : xs) {
            double s = 0.0;
            for (std::uint32_t y = y0; y < y0 + tile; ++y) {
                const float* pa = a.data.data() + static_cast<std::size_t>(y) * w + x0;
                const float* pb = b.data.data() + static_cast<std::size_t>(y) * w + x0;
                for (std::uint32_t x = 0; x < tile; ++x) {
                    const double d = static_cast<double>(pa[x]) - static_cast<double>(pb[x]);
                    s += d * d;
                }
            }
            best = std::max(best, std::sqrt(s / denom));
        }
    }
    return best;
}

MemorizationFilter::MemorizationFilter(std::shared_ptr<const Corpus> corpus, std::uint32_t tile,
                                       std::uint32_t stride, double threshold)
    : corpus_(std::move(corpus)), tile_(tile), stride_(stride), threshold_(threshold) {
    if (!corpus_ || corpus_->records.empty())
        throw std::invalid_argument("MemorizationFilter: empty corpus");
    if (tile_ < 1 || tile_ > corpus_->height || tile_ > corpus_->width)
        throw std::invalid_argument("MemorizationFilter: tile must fit the corpus images");
    if (stride_ < 1 || stride_ > tile_)
        throw std::invalid_argument("MemorizationFilter: stride must be in [1, tile]");
    if (!(threshold_ > 0))
        throw std::invalid_argument("MemorizationFilter: threshold must be positive");
}

FilterVerdict MemorizationFilter::scan(const Tensor& image01) const {
    for (float v : image01.data)
        if (v < 0.0f || v > 1.0f)
            throw std::invalid_argument("memorization scan: pixels must lie in [0,1]");
    FilterVerdict v;
    v.filter = name();
    v.threshold = threshold_;
    v.score = std::numeric_limits<double>::infinity();
    for (const auto& rec : corpus_->records) {
        const double d = tiled_l2(image01, rec.pixels, tile_, stride_);
        v.score = std::min(v.score, d);
        if (d < threshold_) v.matches.emplace_back(rec.id, d);
    }
    std::sort(v.matches.begin(), v.matches.end(),
              [](const auto& a, const auto& b) { return a.second < b.second; });
    v.triggered = v.score < threshold_;
    return v;
}

}  // namespace lsteer
