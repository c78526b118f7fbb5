#pragma once

#include <cstdint>
#include <vector>

#include "lsteer/schedule.hpp"
#include "lsteer/tensor.hpp"

namespace lsteer {

// Anything that predicts the noise added to x_t. Lets the sampler run
// against mocks (zero predictor, linear models) in tests.
struct NoisePredictor {
    virtual ~NoisePredictor() = default;
    virtual Tensor predict(const Tensor& x_t, int t, int cond) const = 0;
    virtual std::vector<std::uint32_t> latent_shape() const = 0;
};

struct DenoiserConfig {
    std::uint32_t height = 16;
    std::uint32_t width = 16;
    std::uint32_t hidden_width = 256;
    std::uint32_t hidden_layers = 2;  // linear layers = hidden_layers + 1
    std::uint32_t t_embed_dim = 32;
    std::uint32_t cond_embed_dim = 32;
    std::uint32_t conditions = 3;  // ids 1..conditions; 0 is the null id

    std::uint32_t image_dim() const { return height * width; }
    std::uint32_t vocab() const { return conditions + 1; }
    bool operator==(const DenoiserConfig&) const = default;
};

// Conditional MLP noise predictor.
//
// Stack of linear layers with SiLU activations. The sinusoidal timestep
// embedding and the learned condition embedding are concatenated onto the
// input of every hidden layer. The output head is an image-space
// prediction with an analytic signal-scaled skip,
//     y_hat = clamp(sqrt(a_bar_t) * x_t + mlp(x_t, t, c), -1, 1),
// and the network's noise prediction (the quantity the Eq.-style training
// loss sees) is recovered analytically:
//     eps_hat = (x_t - sqrt(a_bar_t) * y_hat) / sqrt(1 - a_bar_t).
// Gradients are hand-rolled reverse mode; see Trainer.
class Denoiser : public NoisePredictor {
  public:
    Denoiser() = default;
    Denoiser(const DenoiserConfig& cfg, const NoiseSchedule& sched, std::uint64_t init_seed);

    const DenoiserConfig& config() const { return cfg_; }
    const NoiseSchedule& schedule() const { return sched_; }
    std::uint64_t init_seed() const { return init_seed_; }

    Tensor predict(const Tensor& x_t, int t, int cond) const override;
    std::vector<std::uint32_t> latent_shape() const override { return {cfg_.height, cfg_.width}; }

    // Image-space head output y_hat (clamped).
    Tensor predict_image(const Tensor& x_t, int t, int cond) const;

    // Post-activation vector of one hidden layer (0-based). The embedding
    // extractor reads the penultimate layer, index hidden_layers - 1.
    std::vector<float> hidden_activations(const Tensor& x_t, int t, int cond,
                                          std::uint32_t layer) const;

    std::vector<Tensor>& params() { return params_; }
    const std::vector<Tensor>& params() const { return params_; }
    std::vector<std::string> param_names() const;
    std::size_t param_count() const;

    // Layout helpers shared with the trainer.
    std::uint32_t layer_in(std::uint32_t l) const;
    std::uint32_t layer_out(std::uint32_t l) const;
    void t_embedding(int t, float* out) const;

    // Full forward pass keeping intermediate activations (training, probes).
    struct Trace {
        std::vector<std::vector<float>> inputs;  // per linear layer input
        std::vector<std::vector<float>> pre;     // pre-activation per hidden layer
        std::vector<std::vector<float>> post;    // SiLU output per hidden layer
        std::vector<float> y_raw;                // mlp output before skip/clamp
        std::vector<float> y_skip;               // skip + y_raw, before clamp
        std::vector<float> y_hat;                // clamped image prediction
    };
    void forward_trace(const Tensor& x_t, int t, int cond, Trace& tr) const;

    // Replaces weights; shapes must match the config.
    void set_params(std::vector<Tensor> p);

  private:
    DenoiserConfig cfg_;
    NoiseSchedule sched_;
    std::uint64_t init_seed_ = 0;
    // params_ layout: w0, b0, ..., wL, bL, cond_embed
    std::vector<Tensor> params_;
};

// sqrt(a_bar)*x + sqrt(1 - a_bar)*eps with an explicit signal level.
Tensor forward_noise_at(const Tensor& x, const Tensor& eps, double a_bar);
// Same, indexed into a schedule; t out of range throws.
Tensor forward_noise(const Tensor& x, int t, const Tensor& eps, const NoiseSchedule& sched);

// Mean squared error between eps and the model prediction on the noised input.
double diffusion_loss(const Tensor& x, int t, const Tensor& eps, int cond,
                      const NoisePredictor& model, const NoiseSchedule& sched);

// Pixel range conversions at the module boundary.
Tensor to_model_range(const Tensor& img01);   // [0,1] -> [-1,1]
Tensor to_image_range(const Tensor& model);   // [-1,1] -> [0,1], clamped

}  // namespace lsteer
