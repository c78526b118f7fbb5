#pragma once

#include <array>
#include <optional>

#include <nlohmann/json.hpp>

#include "lsteer/denoiser.hpp"

namespace lsteer {

// Desk-scale stand-in for CLIP image embeddings: one hidden layer of the
// trained denoiser, read at a fixed evaluation timestep with the null
// condition, unit-normalized. A 2D PCA basis fitted on a reference image
// set provides the plot coordinates; the basis freezes after fit.
class EmbeddingExtractor {
  public:
    EmbeddingExtractor(const Denoiser& model, std::uint32_t layer, int t_eval);

    // Deterministic feature vector; normalized to unit length.
    std::vector<float> embed(const Tensor& image01) const;
    std::uint32_t dim() const { return model_->config().hidden_width; }

    // Mean-centered top-2 PCA via eigendecomposition of the feature
    // covariance. Sign convention: each direction's largest-magnitude
    // component is positive. Needs >= 3 images and a rank-2 covariance.
    void fit_pca(const std::vector<Tensor>& images01);

    bool fitted() const { return fitted_; }
    std::array<double, 2> project(const std::vector<float>& feature) const;

    nlohmann::json basis_json() const;
    void load_basis(const nlohmann::json& j);

    std::uint32_t layer() const { return layer_; }
    int t_eval() const { return t_eval_; }
    const std::vector<double>& mean() const { return mean_; }
    const std::vector<std::vector<double>>& directions() const { return dirs_; }

  private:
    const Denoiser* model_;
    std::uint32_t layer_;
    int t_eval_;
    bool fitted_ = false;
    std::vector<double> mean_;
    std::vector<std::vector<double>> dirs_;  // two orthonormal directions
};

struct DriftPair {
    std::array<double, 2> baseline_2d{};
    std::array<double, 2> steered_2d{};
    std::array<double, 2> arrow{};  // steered - baseline, exactly
    double cosine = 0.0;            // full-dimensional cosine similarity
    double distance = 0.0;          // full-dimensional distance
};

struct DriftReport {
    std::vector<DriftPair> pairs;
    double mean_arrow_norm = 0.0;
    double mean_distance = 0.0;
    double mean_cosine = 0.0;

    nlohmann::json to_json() const;
    static DriftReport from_json(const nlohmann::json& j);
};

// Paired baseline/steered images; lengths must match, extractor fitted.
DriftReport drift(const std::vector<Tensor>& baselines01, const std::vector<Tensor>& steered01,
                  const EmbeddingExtractor& extractor);

struct DistanceHistogram {
    std::vector<double> edges;  // strictly increasing
    std::vector<std::uint64_t> counts;
    double threshold = 0.0;

    nlohmann::json to_json() const;
};

// Bin i covers [edges[i], edges[i+1]); the last bin is closed. Scores
// outside the edges are an error.
DistanceHistogram histogram(const std::vector<double>& scores, const std::vector<double>& edges,
                            double threshold);

// Symmetric eigendecomposition by cyclic Jacobi; returns eigenvalues
// descending with matching eigenvectors (rows). Used for the PCA fit and
// exposed for tests.
void jacobi_eigh(std::vector<double> a, std::size_t n, std::vector<double>& eigenvalues,
                 std::vector<std::vector<double>>& eigenvectors);

}  // namespace lsteer
