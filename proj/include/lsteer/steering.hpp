#pragma once

#include <optional>
#include <string>
#include <vector>

#include "lsteer/tensor.hpp"

namespace lsteer {

enum class Similarity { Cosine, Dot };
enum class RegKind { L2, L1 };

// Desired (pull) and undesired (push) latent anchors. Not both empty when
// a refinement is requested.
struct AnchorSets {
    std::vector<Tensor> desired;
    std::vector<Tensor> undesired;

    bool empty() const { return desired.empty() && undesired.empty(); }
    // Shape/norm validation against the latent shape.
    void validate(const std::vector<std::uint32_t>& latent_shape) const;
    // Copy with every anchor unit-normalized (double-precision division, so
    // rescaling an anchor by a power of two is bit-invariant). Used when
    // similarity = cosine.
    AnchorSets normalized() const;
};

struct SteeringConfig {
    double alpha = 0.0;          // pull weight
    double beta = 1.0;           // push weight
    Similarity similarity = Similarity::Cosine;
    RegKind reg = RegKind::L2;
    double reg_weight = 1.0;     // lambda
    double lr = 0.05;
    std::uint32_t steps = 50;
    std::optional<double> grad_clip;  // max gradient norm

    void validate() const;
};

struct SteeringResult {
    Tensor latent;                        // refined L
    std::vector<double> objective_trace;  // length steps + 1
    std::vector<double> sim_undesired_trace;
    double displacement = 0.0;            // |L - L0|_2
};

// -alpha * mean_D sim(D, L) + beta * mean_U sim(U, L) + lambda * reg(L - L0).
// Empty anchor sets contribute zero. reg is sum of squares (L2) or of
// absolute values (L1) over elements.
double steering_objective(const Tensor& L, const Tensor& L0, const AnchorSets& anchors,
                          const SteeringConfig& cfg);

// Exact analytic gradient of steering_objective w.r.t. L; the L1
// subgradient uses sign(0) = 0.
Tensor steering_objective_grad(const Tensor& L, const Tensor& L0, const AnchorSets& anchors,
                               const SteeringConfig& cfg);

// Plain gradient descent from L = L0 for cfg.steps iterations, with
// optional gradient-norm clipping. Trace lengths are steps + 1.
SteeringResult refine_latent(const Tensor& L0, const AnchorSets& anchors,
                             const SteeringConfig& cfg);

Similarity similarity_from_string(const std::string& s);
RegKind reg_from_string(const std::string& s);
std::string to_string(Similarity s);
std::string to_string(RegKind r);

}  // namespace lsteer
