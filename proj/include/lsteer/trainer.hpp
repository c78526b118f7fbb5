#pragma once

#include <functional>
#include <optional>

#include "lsteer/corpus.hpp"
#include "lsteer/denoiser.hpp"
#include "lsteer/rng.hpp"

namespace lsteer {

struct TrainConfig {
    double lr = 5e-4;
    std::uint32_t batch = 32;
    std::uint32_t epochs = 500;
    std::uint64_t seed = 1;
    std::uint32_t height = 16;
    std::uint32_t width = 16;
    std::uint32_t conditions = 3;

    void validate() const;
};

struct TrainSample {
    Tensor x;  // clean image in model range [-1,1]
    int t = 0;
    Tensor eps;
    int cond = 0;
};

// One denoiser training step owner. Computes exact reverse-mode gradients
// for the MLP (finite-difference checked in the test suite) and applies an
// Adam update (beta1=0.9, beta2=0.999, eps=1e-8). Gradients are clipped to
// a global norm of 5.0 before the update: the Eq.-style noise loss carries
// a per-timestep weight spanning four orders of magnitude and raw steps
// destabilize the moment estimates.
class Trainer {
  public:
    explicit Trainer(Denoiser& model, double lr);

    // Mini-batch step; returns the batch loss. lr = 0 leaves parameters
    // unchanged. Non-finite loss throws Error with a diagnostic.
    double backprop_step(const std::vector<TrainSample>& batch);

    // Gradient of the batch loss, reduced in sample order. Exposed so the
    // finite-difference oracle can check it without stepping.
    std::vector<Tensor> gradients(const std::vector<TrainSample>& batch) const;

    double lr() const { return lr_; }
    void set_lr(double lr) { lr_ = lr; }
    std::uint64_t steps_taken() const { return step_; }

  private:
    Denoiser& model_;
    double lr_;
    std::uint64_t step_ = 0;
    std::vector<Tensor> m_, v_;
};

struct EpochStats {
    std::uint32_t epoch = 0;
    double mean_loss = 0.0;
};

// Full training run over a corpus: per-epoch stream expansion by
// duplication, deterministic shuffle derived from (corpus hash, seed,
// epoch), per-sample timestep/noise draws and per-record augmentation.
// Returns per-epoch stats; the callback (if any) sees them as they happen.
std::vector<EpochStats> train_model(Denoiser& model, const Corpus& corpus,
                                    const TrainConfig& cfg,
                                    const std::function<void(const EpochStats&)>& on_epoch = {});

// The augmentation applied to a drawn record, keyed by the manifest's
// augment mode. "shift" rolls the image by a random circular offset;
// "full" also jitters contrast in [0.5, 1] and flips polarity with p=1/2.
Tensor augment_sample(const Tensor& img_model_range, AugmentMode mode, std::uint32_t height,
                      std::uint32_t width, RngState& rng);

}  // namespace lsteer
