#include "lsteer/trainer.hpp"

#include <cmath>
#include <cstring>

#include "lsteer/util.hpp"

namespace lsteer {

void TrainConfig::validate() const {
    if (lr < 0) throw ConfigError("train: lr must be >= 0");
    if (batch < 1) throw ConfigError("train: batch must be >= 1");
    if (epochs < 1) throw ConfigError("train: epochs must be >= 1");
    if (height == 0 || width == 0) throw ConfigError("train: image extents must be positive");
    if (conditions < 1) throw ConfigError("train: conditions must be >= 1");
}

Trainer::Trainer(Denoiser& model, double lr) : model_(model), lr_(lr) {
    for (const auto& p : model_.params()) {
        m_.emplace_back(p.shape);
        v_.emplace_back(p.shape);
    }
}

static inline float dsilu(float x) {
    const float s = 1.0f / (1.0f + std::exp(-x));
    return s * (1.0f + x * (1.0f - s));
}

std::vector<Tensor> Trainer::gradients(const std::vector<TrainSample>& batch) const {
    if (batch.empty()) throw std::invalid_argument("backprop: empty batch");
    const auto& cfg = model_.config();
    const auto& sched = model_.schedule();
    const std::uint32_t D = cfg.image_dim();
    const std::uint32_t H = cfg.hidden_width;
    const std::uint32_t TE = cfg.t_embed_dim, CE = cfg.cond_embed_dim;
    const std::uint32_t HL = cfg.hidden_layers;

    std::vector<Tensor> grads;
    for (const auto& p : model_.params()) grads.emplace_back(p.shape);
    Tensor& g_ctab = grads.back();

    Denoiser::Trace tr;
    std::vector<float> g_out(D), g_cur, g_prev;
    const double inv = 1.0 / (static_cast<double>(batch.size()) * D);

    for (const auto& s : batch) {
        if (s.t < 0 || s.t >= sched.steps)
            throw std::invalid_argument("backprop: sample timestep out of range");
        const double ab = sched.a_bar[s.t];
        const float sa = static_cast<float>(std::sqrt(ab));
        const float sb = static_cast<float>(std::sqrt(1.0 - ab));
        Tensor x_t = forward_noise_at(s.x, s.eps, ab);
        model_.forward_trace(x_t, s.t, s.cond, tr);

        // loss term: mean over batch and dims of (eps_hat - eps)^2 with
        // eps_hat = (x_t - sa * y_hat) / sb; chain through clamp and skip.
        for (std::uint32_t j = 0; j < D; ++j) {
            const float eps_hat = (x_t[j] - sa * tr.y_hat[j]) / sb;
            const float g_pred = static_cast<float>(2.0 * inv) * (eps_hat - s.eps[j]);
            const bool open = tr.y_skip[j] > -1.0f && tr.y_skip[j] < 1.0f;
            g_out[j] = open ? g_pred * (-sa / sb) : 0.0f;
        }

        // output layer
        {
            const std::uint32_t l = HL;
            const std::uint32_t nin = model_.layer_in(l);
            Tensor& gw = grads[2 * l];
            Tensor& gb = grads[2 * l + 1];
            const auto& in = tr.inputs[l];
            for (std::uint32_t i = 0; i < nin; ++i) {
                const float xi = in[i];
                float* grow = gw.data.data() + static_cast<std::size_t>(i) * D;
                for (std::uint32_t j = 0; j < D; ++j) grow[j] += xi * g_out[j];
            }
            for (std::uint32_t j = 0; j < D; ++j) gb[j] += g_out[j];
            const Tensor& w = model_.params()[2 * l];
            g_cur.assign(nin, 0.0f);
            for (std::uint32_t i = 0; i < nin; ++i) {
                const float* row = w.data.data() + static_cast<std::size_t>(i) * D;
                double acc = 0.0;
                for (std::uint32_t j = 0; j < D; ++j) acc += row[j] * g_out[j];
                g_cur[i] = static_cast<float>(acc);
            }
        }

        // hidden layers, backwards
        for (int l = static_cast<int>(HL) - 1; l >= 0; --l) {
            const std::uint32_t nin = model_.layer_in(l);
            const std::uint32_t nout = model_.layer_out(l);
            // g_cur currently holds dL/d(post activations of layer l)
            std::vector<float> g_a(nout);
            for (std::uint32_t j = 0; j < nout; ++j) g_a[j] = g_cur[j] * dsilu(tr.pre[l][j]);
            Tensor& gw = grads[2 * l];
            Tensor& gb = grads[2 * l + 1];
            const auto& in = tr.inputs[l];
            for (std::uint32_t i = 0; i < nin; ++i) {
                const float xi = in[i];
                if (xi != 0.0f) {
                    float* grow = gw.data.data() + static_cast<std::size_t>(i) * nout;
                    for (std::uint32_t j = 0; j < nout; ++j) grow[j] += xi * g_a[j];
                }
            }
            for (std::uint32_t j = 0; j < nout; ++j) gb[j] += g_a[j];

            const Tensor& w = model_.params()[2 * l];
            g_prev.assign(nin, 0.0f);
            for (std::uint32_t i = 0; i < nin; ++i) {
                const float* row = w.data.data() + static_cast<std::size_t>(i) * nout;
                double acc = 0.0;
                for (std::uint32_t j = 0; j < nout; ++j) acc += row[j] * g_a[j];
                g_prev[i] = static_cast<float>(acc);
            }
            // condition embedding receives the tail slice of every layer input
            const std::uint32_t body = l == 0 ? D : H;
            float* gce = g_ctab.data.data() + static_cast<std::size_t>(s.cond) * CE;
            for (std::uint32_t k = 0; k < CE; ++k) gce[k] += g_prev[body + TE + k];
            g_cur.assign(g_prev.begin(), g_prev.begin() + body);
        }
    }
    return grads;
}

double Trainer::backprop_step(const std::vector<TrainSample>& batch) {
    if (batch.empty()) throw std::invalid_argument("backprop_step: empty batch");
    const auto& sched = model_.schedule();

    double loss = 0.0;
    for (const auto& s : batch)
        loss += diffusion_loss(s.x, s.t, s.eps, s.cond, model_, sched);
    loss /= static_cast<double>(batch.size());
    if (!std::isfinite(loss))
        throw Error("training aborted: non-finite loss at step " + std::to_string(step_));

    auto grads = gradients(batch);

    // global norm clip, then Adam
    double norm_sq = 0.0;
    for (const auto& g : grads)
        for (float v : g.data) norm_sq += static_cast<double>(v) * v;
    const double gnorm = std::sqrt(norm_sq);
    const double clip = 5.0;
    const float gscale = gnorm > clip ? static_cast<float>(clip / gnorm) : 1.0f;

    ++step_;
    const double b1 = 0.9, b2 = 0.999, eps = 1e-8;
    const double bc1 = 1.0 - std::pow(b1, static_cast<double>(step_));
    const double bc2 = 1.0 - std::pow(b2, static_cast<double>(step_));
    auto& params = model_.params();
    for (std::size_t p = 0; p < params.size(); ++p) {
        float* w = params[p].data.data();
        float* m = m_[p].data.data();
        float* v = v_[p].data.data();
        const float* g = grads[p].data.data();
        const std::size_t n = params[p].size();
        for (std::size_t i = 0; i < n; ++i) {
            const double gi = static_cast<double>(g[i]) * gscale;
            const double mi = b1 * m[i] + (1.0 - b1) * gi;
            const double vi = b2 * v[i] + (1.0 - b2) * gi * gi;
            m[i] = static_cast<float>(mi);
            v[i] = static_cast<float>(vi);
            w[i] = static_cast<float>(w[i] - lr_ * (mi / bc1) / (std::sqrt(vi / bc2) + eps));
        }
    }
    return loss;
}

Tensor augment_sample(const Tensor& img, AugmentMode mode, std::uint32_t height,
                      std::uint32_t width, RngState& rng) {
    if (mode == AugmentMode::None) return img;
    Tensor out(img.shape);
    const auto dy = static_cast<std::uint32_t>(rng.below(height));
    const auto dx = static_cast<std::uint32_t>(rng.below(width));
    for (std::uint32_t y = 0; y < height; ++y)
        for (std::uint32_t x = 0; x < width; ++x)
            out[((y + dy) % height) * width + ((x + dx) % width)] = img[y * width + x];
    if (mode == AugmentMode::Full) {
        const float contrast = static_cast<float>(0.5 + 0.5 * rng.uniform());
        const float sign = rng.uniform() < 0.5 ? -1.0f : 1.0f;
        for (auto& v : out.data) v *= contrast * sign;
    }
    return out;
}

std::vector<EpochStats> train_model(Denoiser& model, const Corpus& corpus,
                                    const TrainConfig& cfg,
                                    const std::function<void(const EpochStats&)>& on_epoch) {
    cfg.validate();
    if (corpus.height != cfg.height || corpus.width != cfg.width)
        throw ConfigError("train: corpus extents do not match config");

    Trainer opt(model, cfg.lr);
    std::vector<EpochStats> stats;
    std::vector<TrainSample> batch;
    // separate stream for the (t, eps, augmentation) draws
    RngState draw = RngState(cfg.seed).derive(corpus.content_hash).derive(0xA5A5A5A5ULL);

    for (std::uint32_t ep = 0; ep < cfg.epochs; ++ep) {
        auto stream = corpus.epoch_stream(cfg.seed, ep);
        double loss_sum = 0.0;
        std::size_t n_batches = 0;
        for (std::size_t off = 0; off < stream.size(); off += cfg.batch) {
            batch.clear();
            const std::size_t end = std::min(stream.size(), off + cfg.batch);
            for (std::size_t i = off; i < end; ++i) {
                const ImageRecord& rec = corpus.records[stream[i]];
                TrainSample s;
                Tensor x = to_model_range(rec.pixels);
                s.x = augment_sample(x, rec.augment, corpus.height, corpus.width, draw);
                s.t = static_cast<int>(draw.below(model.schedule().steps));
                s.eps = gaussian(draw, {corpus.height, corpus.width});
                s.cond = rec.condition;
                batch.push_back(std::move(s));
            }
            loss_sum += opt.backprop_step(batch);
            ++n_batches;
        }
        EpochStats es{ep, loss_sum / static_cast<double>(n_batches)};
        stats.push_back(es);
        if (on_epoch) on_epoch(es);
    }
    return stats;
}

}  // namespace lsteer
