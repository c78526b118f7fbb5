#pragma once

#include "lsteer/denoiser.hpp"
#include "lsteer/schedule.hpp"
#include "lsteer/tensor.hpp"

namespace lsteer {

struct SamplerOptions {
    int substeps = 25;       // must divide the schedule's step count
    bool clip_x0 = true;     // clamp per-step x0 prediction to [-1,1]
    int invert_fp_iters = 6; // fixed-point refinements per inversion step
};

// Deterministic (eta = 0) DDIM trajectory from z_T to z_0, in model range.
// Identical inputs give bit-identical outputs.
Tensor ddim_sample(const Tensor& z_T, int cond, const NoisePredictor& model,
                   const NoiseSchedule& sched, const SamplerOptions& opts);

// Maps an image in [0,1] to the latent z_T whose ddim_sample trajectory
// reconstructs it. Each inversion step first takes the explicit reverse
// step, then fixed-point-iterates so it inverts the sampler step proper;
// for a constant predictor this is the exact algebraic inverse.
Tensor ddim_invert(const Tensor& img01, int cond, const NoisePredictor& model,
                   const NoiseSchedule& sched, const SamplerOptions& opts);

// Descending timestep grid used by the sampler: T-1, T-1-k, ..., k-1.
std::vector<int> ddim_timesteps(const NoiseSchedule& sched, int substeps);

}  // namespace lsteer
