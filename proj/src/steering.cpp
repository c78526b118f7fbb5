#include "lsteer/steering.hpp"

#include <cmath>

#include "lsteer/util.hpp"

namespace lsteer {

void AnchorSets::validate(const std::vector<std::uint32_t>& latent_shape) const {
    auto check = [&](const std::vector<Tensor>& set, const char* name) {
        for (const auto& a : set) {
            if (a.shape != latent_shape)
                throw std::invalid_argument(std::string(name) + " anchor shape mismatch");
            if (norm2(a) == 0.0)
                throw std::invalid_argument(std::string(name) + " anchor has zero norm");
        }
    };
    check(desired, "desired");
    check(undesired, "undesired");
}

AnchorSets AnchorSets::normalized() const {
    auto norm_set = [](const std::vector<Tensor>& set) {
        std::vector<Tensor> out;
        out.reserve(set.size());
        for (const auto& a : set) {
            const double n = norm2(a);
            Tensor t(a.shape);
            for (std::size_t i = 0; i < a.size(); ++i)
                t[i] = static_cast<float>(static_cast<double>(a[i]) / n);
            out.push_back(std::move(t));
        }
        return out;
    };
    AnchorSets r;
    r.desired = norm_set(desired);
    r.undesired = norm_set(undesired);
    return r;
}

void SteeringConfig::validate() const {
    if (alpha < 0) throw ConfigError("steering: alpha must be >= 0");
    if (beta < 0) throw ConfigError("steering: beta must be >= 0");
    if (reg_weight < 0) throw ConfigError("steering: reg_weight must be >= 0");
    if (!(lr > 0)) throw ConfigError("steering: lr must be > 0");
    if (grad_clip && !(*grad_clip > 0)) throw ConfigError("steering: grad_clip must be > 0");
}

static double mean_sim(const std::vector<Tensor>& set, const Tensor& L, Similarity sim) {
    if (set.empty()) return 0.0;
    double s = 0.0;
    for (const auto& a : set)
        s += sim == Similarity::Cosine ? cosine_sim(a, L) : dot(a, L);
    return s / static_cast<double>(set.size());
}

double steering_objective(const Tensor& L, const Tensor& L0, const AnchorSets& anchors,
                          const SteeringConfig& cfg) {
    if (!L.same_shape(L0))
        throw std::invalid_argument("steering_objective: L and L0 shape mismatch");
    if (cfg.similarity == Similarity::Cosine && !anchors.empty() && norm2(L) == 0.0)
        throw std::invalid_argument("steering_objective: zero-norm L under cosine similarity");
    double obj = -cfg.alpha * mean_sim(anchors.desired, L, cfg.similarity) +
                 cfg.beta * mean_sim(anchors.undesired, L, cfg.similarity);
    double reg = 0.0;
    for (std::size_t i = 0; i < L.size(); ++i) {
        const double d = static_cast<double>(L[i]) - static_cast<double>(L0[i]);
        reg += cfg.reg == RegKind::L2 ? d * d : std::abs(d);
    }
    return obj + cfg.reg_weight * reg;
}

// d/dL cos(A, L) = A/(|L||A|) - (A.L) L/(|L|^3 |A|)
static void add_sim_grad(std::vector<double>& g, const std::vector<Tensor>& set, const Tensor& L,
                         Similarity sim, double weight) {
    if (set.empty() || weight == 0.0) return;
    const double w = weight / static_cast<double>(set.size());
    if (sim == Similarity::Dot) {
        for (const auto& a : set)
            for (std::size_t i = 0; i < g.size(); ++i) g[i] += w * a[i];
        return;
    }
    const double nl = norm2(L);
    if (nl == 0.0)
        throw std::invalid_argument("steering gradient: zero-norm L under cosine similarity");
    for (const auto& a : set) {
        const double na = norm2(a);
        const double al = dot(a, L);
        const double c1 = 1.0 / (nl * na);
        const double c2 = al / (nl * nl * nl * na);
        for (std::size_t i = 0; i < g.size(); ++i)
            g[i] += w * (c1 * a[i] - c2 * L[i]);
    }
}

Tensor steering_objective_grad(const Tensor& L, const Tensor& L0, const AnchorSets& anchors,
                               const SteeringConfig& cfg) {
    if (!L.same_shape(L0))
        throw std::invalid_argument("steering_objective_grad: L and L0 shape mismatch");
    std::vector<double> g(L.size(), 0.0);
    add_sim_grad(g, anchors.desired, L, cfg.similarity, -cfg.alpha);
    add_sim_grad(g, anchors.undesired, L, cfg.similarity, cfg.beta);
    for (std::size_t i = 0; i < g.size(); ++i) {
        const double d = static_cast<double>(L[i]) - static_cast<double>(L0[i]);
        if (cfg.reg == RegKind::L2)
            g[i] += cfg.reg_weight * 2.0 * d;
        else if (d != 0.0)  // sign(0) = 0
            g[i] += cfg.reg_weight * (d > 0 ? 1.0 : -1.0);
    }
    Tensor out(L.shape);
    for (std::size_t i = 0; i < g.size(); ++i) out[i] = static_cast<float>(g[i]);
    return out;
}

SteeringResult refine_latent(const Tensor& L0, const AnchorSets& anchors,
                             const SteeringConfig& cfg) {
    cfg.validate();
    if (anchors.empty() && cfg.steps > 0)
        throw std::invalid_argument("refine_latent: both anchor sets empty");
    anchors.validate(L0.shape);
    const AnchorSets prepared =
        cfg.similarity == Similarity::Cosine ? anchors.normalized() : anchors;

    SteeringResult res;
    res.latent = L0;
    res.objective_trace.reserve(cfg.steps + 1);
    res.sim_undesired_trace.reserve(cfg.steps + 1);
    auto record = [&](const Tensor& L) {
        const double obj = steering_objective(L, L0, prepared, cfg);
        if (!std::isfinite(obj))
            throw Error("refine_latent: non-finite objective at iteration " +
                        std::to_string(res.objective_trace.size()));
        res.objective_trace.push_back(obj);
        double su = 0.0;
        if (!prepared.undesired.empty()) {
            for (const auto& u : prepared.undesired)
                su += cfg.similarity == Similarity::Cosine ? cosine_sim(u, L) : dot(u, L);
            su /= static_cast<double>(prepared.undesired.size());
        }
        res.sim_undesired_trace.push_back(su);
    };

    record(res.latent);
    for (std::uint32_t step = 0; step < cfg.steps; ++step) {
        Tensor g = steering_objective_grad(res.latent, L0, prepared, cfg);
        if (cfg.grad_clip) {
            const double n = norm2(g);
            if (n > *cfg.grad_clip) {
                const float s = static_cast<float>(*cfg.grad_clip / n);
                for (auto& v : g.data) v *= s;
            }
        }
        axpy(static_cast<float>(-cfg.lr), g, res.latent);
        record(res.latent);
    }
    res.displacement = norm2(sub(res.latent, L0));
    return res;
}

Similarity similarity_from_string(const std::string& s) {
    if (s == "cosine") return Similarity::Cosine;
    if (s == "dot") return Similarity::Dot;
    throw ConfigError("unknown similarity: " + s);
}

RegKind reg_from_string(const std::string& s) {
    if (s == "l2") return RegKind::L2;
    if (s == "l1") return RegKind::L1;
    throw ConfigError("unknown reg kind: " + s);
}

std::string to_string(Similarity s) { return s == Similarity::Cosine ? "cosine" : "dot"; }
std::string to_string(RegKind r) { return r == RegKind::L2 ? "l2" : "l1"; }

}  // namespace lsteer
