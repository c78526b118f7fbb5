#include "lsteer/ddim.hpp"

#include <cmath>

namespace lsteer {

std::vector<int> ddim_timesteps(const NoiseSchedule& sched, int substeps) {
    if (substeps <= 0)
        throw std::invalid_argument("ddim: substeps must be positive");
    if (sched.steps % substeps != 0)
        throw std::invalid_argument("ddim: substeps must divide the schedule step count");
    const int k = sched.steps / substeps;
    std::vector<int> taus;
    taus.reserve(substeps);
    for (int t = sched.steps - 1; t >= 0; t -= k) taus.push_back(t);
    return taus;
}

Tensor ddim_sample(const Tensor& z_T, int cond, const NoisePredictor& model,
                   const NoiseSchedule& sched, const SamplerOptions& opts) {
    auto taus = ddim_timesteps(sched, opts.substeps);
    Tensor x = z_T;
    for (std::size_t i = 0; i < taus.size(); ++i) {
        const double ac = sched.a_bar[taus[i]];
        const double ap = i + 1 < taus.size() ? sched.a_bar[taus[i + 1]] : 1.0;
        const Tensor eps = model.predict(x, taus[i], cond);
        const float sac = static_cast<float>(std::sqrt(ac));
        const float sbc = static_cast<float>(std::sqrt(1.0 - ac));
        const float sap = static_cast<float>(std::sqrt(ap));
        const float sbp = static_cast<float>(std::sqrt(1.0 - ap));
        for (std::size_t j = 0; j < x.size(); ++j) {
            float x0 = (x[j] - sbc * eps[j]) / sac;
            if (opts.clip_x0) x0 = x0 < -1.0f ? -1.0f : (x0 > 1.0f ? 1.0f : x0);
            x[j] = sap * x0 + sbp * eps[j];
        }
    }
    ensure_finite(x, "ddim_sample");
    return x;
}

Tensor ddim_invert(const Tensor& img01, int cond, const NoisePredictor& model,
                   const NoiseSchedule& sched, const SamplerOptions& opts) {
    auto taus = ddim_timesteps(sched, opts.substeps);  // descending; walk it backwards
    Tensor x = to_model_range(img01);
    double a_prev = 1.0;
    for (auto it = taus.rbegin(); it != taus.rend(); ++it) {
        const int tau = *it;
        const double ab = sched.a_bar[tau];
        const float sab = static_cast<float>(std::sqrt(ab));
        const float sbb = static_cast<float>(std::sqrt(1.0 - ab));
        const float sap = static_cast<float>(std::sqrt(a_prev));
        const float sbp = static_cast<float>(std::sqrt(1.0 - a_prev));

        // explicit reverse step evaluated at the current (cleaner) state
        Tensor eps = model.predict(x, tau, cond);
        Tensor xb(x.shape);
        for (std::size_t j = 0; j < x.size(); ++j) {
            const float x0 = (x[j] - sbp * eps[j]) / sap;
            xb[j] = sab * x0 + sbb * eps[j];
        }
        // fixed point: solve x = sap * x0(xb) + (sbp/sbb) * (xb - sab * x0(xb))
        // for xb, where x0 is the model's x0-reconstruction at level tau.
        if (a_prev < 1.0) {
            const float ca = sbp / sbb;
            for (int it2 = 0; it2 < opts.invert_fp_iters; ++it2) {
                Tensor e2 = model.predict(xb, tau, cond);
                for (std::size_t j = 0; j < xb.size(); ++j) {
                    const float x0 = (xb[j] - sbb * e2[j]) / sab;
                    xb[j] = (x[j] - sap * x0) / ca + sab * x0;
                }
            }
        }
        x = std::move(xb);
        a_prev = ab;
    }
    ensure_finite(x, "ddim_invert");
    return x;
}

}  // namespace lsteer
