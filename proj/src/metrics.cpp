#include "lsteer/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "lsteer/util.hpp"

namespace lsteer {

using nlohmann::json;

void jacobi_eigh(std::vector<double> a, std::size_t n, std::vector<double>& eigenvalues,
                 std::vector<std::vector<double>>& eigenvectors) {
    std::vector<double> v(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) v[i * n + i] = 1.0;

    for (int sweep = 0; sweep < 60; ++sweep) {
        double off = 0.0;
        for (std::size_t p = 0; p < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q) off += a[p * n + q] * a[p * n + q];
        if (off < 1e-24) break;
        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = a[p * n + q];
                if (std::abs(apq) < 1e-300) continue;
                const double app = a[p * n + p], aqq = a[q * n + q];
                const double theta = (aqq - app) / (2.0 * apq);
                const double t = (theta >= 0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (std::size_t k = 0; k < n; ++k) {
                    const double akp = a[k * n + p], akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double apk = a[p * n + k], aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double vkp = v[k * n + p], vkq = v[k * n + q];
                    v[k * n + p] = c * vkp - s * vkq;
                    v[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
    }
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](std::size_t x, std::size_t y) { return a[x * n + x] > a[y * n + y]; });
    eigenvalues.resize(n);
    eigenvectors.assign(n, std::vector<double>(n));
    for (std::size_t r = 0; r < n; ++r) {
        eigenvalues[r] = a[order[r] * n + order[r]];
        for (std::size_t k = 0; k < n; ++k) eigenvectors[r][k] = v[k * n + order[r]];
    }
}

EmbeddingExtractor::EmbeddingExtractor(const Denoiser& model, std::uint32_t layer, int t_eval)
    : model_(&model), layer_(layer), t_eval_(t_eval) {
    if (layer >= model.config().hidden_layers)
        throw std::invalid_argument("EmbeddingExtractor: layer index out of range");
    if (t_eval < 0 || t_eval >= model.schedule().steps)
        throw std::invalid_argument("EmbeddingExtractor: t_eval out of range");
}

std::vector<float> EmbeddingExtractor::embed(const Tensor& image01) const {
    Tensor x = to_model_range(image01);
    std::vector<float> h = model_->hidden_activations(x, t_eval_, 0, layer_);
    double n = 0.0;
    for (float hv : h) n += static_cast<double>(hv) * hv;
    n = std::sqrt(n);
    if (n == 0.0) throw Error("embed: zero activation vector");
    for (auto& hv : h) hv = static_cast<float>(hv / n);
    return h;
}

void EmbeddingExtractor::fit_pca(const std::vector<Tensor>& images01) {
    if (images01.size() < 3)
        throw std::invalid_argument("fit_pca: need at least 3 images");
    const std::size_t d = dim();
    std::vector<std::vector<float>> feats;
    feats.reserve(images01.size());
    for (const auto& img : images01) feats.push_back(embed(img));

    mean_.assign(d, 0.0);
    for (const auto& f : feats)
        for (std::size_t i = 0; i < d; ++i) mean_[i] += f[i];
    for (auto& m : mean_) m /= static_cast<double>(feats.size());

    std::vector<double> cov(d * d, 0.0);
    for (const auto& f : feats) {
        for (std::size_t i = 0; i < d; ++i) {
            const double di = f[i] - mean_[i];
            for (std::size_t j = i; j < d; ++j) cov[i * d + j] += di * (f[j] - mean_[j]);
        }
    }
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = i; j < d; ++j) {
            cov[i * d + j] /= static_cast<double>(feats.size());
            cov[j * d + i] = cov[i * d + j];
        }

    std::vector<double> evals;
    std::vector<std::vector<double>> evecs;
    jacobi_eigh(std::move(cov), d, evals, evecs);
    const double rank_tol = 1e-10 * std::max(1.0, evals.empty() ? 0.0 : evals[0]);
    if (evals.size() < 2 || evals[1] <= rank_tol)
        throw Error("fit_pca: feature matrix has rank < 2");

    dirs_.assign(2, std::vector<double>(d));
    for (int r = 0; r < 2; ++r) {
        dirs_[r] = evecs[r];
        // sign convention: largest-magnitude component positive
        std::size_t arg = 0;
        for (std::size_t i = 1; i < d; ++i)
            if (std::abs(dirs_[r][i]) > std::abs(dirs_[r][arg])) arg = i;
        if (dirs_[r][arg] < 0)
            for (auto& x : dirs_[r]) x = -x;
    }
    fitted_ = true;
}

std::array<double, 2> EmbeddingExtractor::project(const std::vector<float>& feature) const {
    if (!fitted_) throw Error("EmbeddingExtractor: basis not fitted");
    std::array<double, 2> out{0.0, 0.0};
    for (int r = 0; r < 2; ++r) {
        double s = 0.0;
        for (std::size_t i = 0; i < feature.size(); ++i)
            s += (feature[i] - mean_[i]) * dirs_[r][i];
        out[r] = s;
    }
    return out;
}

json EmbeddingExtractor::basis_json() const {
    if (!fitted_) throw Error("EmbeddingExtractor: basis not fitted");
    return json{{"layer", layer_},
                {"t_eval", t_eval_},
                {"mean", mean_},
                {"dir1", dirs_[0]},
                {"dir2", dirs_[1]}};
}

void EmbeddingExtractor::load_basis(const json& j) {
    if (j.at("layer").get<std::uint32_t>() != layer_ || j.at("t_eval").get<int>() != t_eval_)
        throw Error("EmbeddingExtractor: basis does not match extractor configuration");
    mean_ = j.at("mean").get<std::vector<double>>();
    dirs_ = {j.at("dir1").get<std::vector<double>>(), j.at("dir2").get<std::vector<double>>()};
    if (mean_.size() != dim() || dirs_[0].size() != dim() || dirs_[1].size() != dim())
        throw Error("EmbeddingExtractor: basis dimension mismatch");
    fitted_ = true;
}

json DriftReport::to_json() const {
    json jp = json::array();
    for (const auto& p : pairs)
        jp.push_back({{"base", p.baseline_2d},
                      {"steer", p.steered_2d},
                      {"arrow", p.arrow},
                      {"cosine", p.cosine},
                      {"distance", p.distance}});
    return json{{"pairs", jp},
                {"mean_arrow_norm", mean_arrow_norm},
                {"mean_distance", mean_distance},
                {"mean_cosine", mean_cosine}};
}

DriftReport DriftReport::from_json(const json& j) {
    DriftReport r;
    for (const auto& jp : j.at("pairs")) {
        DriftPair p;
        p.baseline_2d = jp.at("base").get<std::array<double, 2>>();
        p.steered_2d = jp.at("steer").get<std::array<double, 2>>();
        p.arrow = jp.at("arrow").get<std::array<double, 2>>();
        p.cosine = jp.at("cosine").get<double>();
        p.distance = jp.at("distance").get<double>();
        r.pairs.push_back(p);
    }
    r.mean_arrow_norm = j.at("mean_arrow_norm").get<double>();
    r.mean_distance = j.at("mean_distance").get<double>();
    r.mean_cosine = j.at("mean_cosine").get<double>();
    return r;
}

DriftReport drift(const std::vector<Tensor>& baselines01, const std::vector<Tensor>& steered01,
                  const EmbeddingExtractor& extractor) {
    if (baselines01.size() != steered01.size())
        throw std::invalid_argument("drift: paired lists must have equal length");
    DriftReport rep;
    for (std::size_t i = 0; i < baselines01.size(); ++i) {
        const auto fb = extractor.embed(baselines01[i]);
        const auto fs = extractor.embed(steered01[i]);
        DriftPair p;
        p.baseline_2d = extractor.project(fb);
        p.steered_2d = extractor.project(fs);
        p.arrow = {p.steered_2d[0] - p.baseline_2d[0], p.steered_2d[1] - p.baseline_2d[1]};
        double d2 = 0.0, nb = 0.0, ns = 0.0, dp = 0.0;
        for (std::size_t k = 0; k < fb.size(); ++k) {
            const double diff = static_cast<double>(fs[k]) - fb[k];
            d2 += diff * diff;
            dp += static_cast<double>(fs[k]) * fb[k];
            nb += static_cast<double>(fb[k]) * fb[k];
            ns += static_cast<double>(fs[k]) * fs[k];
        }
        p.distance = std::sqrt(d2);
        p.cosine = dp / (std::sqrt(nb) * std::sqrt(ns));
        rep.mean_arrow_norm += std::sqrt(p.arrow[0] * p.arrow[0] + p.arrow[1] * p.arrow[1]);
        rep.mean_distance += p.distance;
        rep.mean_cosine += p.cosine;
        rep.pairs.push_back(p);
    }
    if (!rep.pairs.empty()) {
        const auto n = static_cast<double>(rep.pairs.size());
        rep.mean_arrow_norm /= n;
        rep.mean_distance /= n;
        rep.mean_cosine /= n;
    }
    return rep;
}

json DistanceHistogram::to_json() const {
    return json{{"edges", edges}, {"counts", counts}, {"threshold", threshold}};
}

DistanceHistogram histogram(const std::vector<double>& scores, const std::vector<double>& edges,
                            double threshold) {
    if (edges.size() < 2) throw std::invalid_argument("histogram: need at least 2 edges");
    for (std::size_t i = 1; i < edges.size(); ++i)
        if (!(edges[i] > edges[i - 1]))
            throw std::invalid_argument("histogram: edges must be strictly increasing");
    DistanceHistogram h;
    h.edges = edges;
    h.threshold = threshold;
    h.counts.assign(edges.size() - 1, 0);
    for (double s : scores) {
        if (s < edges.front() || s > edges.back())
            throw Error("histogram: score " + std::to_string(s) +
                        " outside the bin edges; extend the edges");
        auto it = std::upper_bound(edges.begin(), edges.end(), s);
        std::size_t bin = static_cast<std::size_t>(it - edges.begin());
        bin = bin == 0 ? 0 : bin - 1;
        if (bin >= h.counts.size()) bin = h.counts.size() - 1;  // closed last bin
        ++h.counts[bin];
    }
    return h;
}

}  // namespace lsteer
