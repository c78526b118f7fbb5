#include "lsteer/denoiser.hpp"

#include <cmath>
#include <cstring>

#include "lsteer/rng.hpp"
#include "lsteer/util.hpp"

namespace lsteer {

static inline float silu(float x) { return x / (1.0f + std::exp(-x)); }

std::uint32_t Denoiser::layer_in(std::uint32_t l) const {
    const std::uint32_t extra = cfg_.t_embed_dim + cfg_.cond_embed_dim;
    if (l == 0) return cfg_.image_dim() + extra;
    if (l < cfg_.hidden_layers) return cfg_.hidden_width + extra;
    return cfg_.hidden_width;  // output layer sees the last hidden state only
}

std::uint32_t Denoiser::layer_out(std::uint32_t l) const {
    return l < cfg_.hidden_layers ? cfg_.hidden_width : cfg_.image_dim();
}

Denoiser::Denoiser(const DenoiserConfig& cfg, const NoiseSchedule& sched, std::uint64_t init_seed)
    : cfg_(cfg), sched_(sched), init_seed_(init_seed) {
    if (cfg_.hidden_layers < 1) throw std::invalid_argument("Denoiser: need >= 1 hidden layer");
    if (cfg_.t_embed_dim % 2 != 0) throw std::invalid_argument("Denoiser: t_embed_dim must be even");
    RngState rng(init_seed);
    const std::uint32_t L = cfg_.hidden_layers + 1;
    for (std::uint32_t l = 0; l < L; ++l) {
        const std::uint32_t nin = layer_in(l), nout = layer_out(l);
        Tensor w({nin, nout});
        // Xavier-uniform
        const double s = std::sqrt(6.0 / (nin + nout));
        for (auto& v : w.data) v = static_cast<float>((2.0 * rng.uniform() - 1.0) * s);
        params_.push_back(std::move(w));
        params_.push_back(Tensor({nout}));
    }
    Tensor ce({cfg_.vocab(), cfg_.cond_embed_dim});
    for (auto& v : ce.data) v = static_cast<float>(rng.gaussian());
    params_.push_back(std::move(ce));
}

std::vector<std::string> Denoiser::param_names() const {
    std::vector<std::string> names;
    for (std::uint32_t l = 0; l <= cfg_.hidden_layers; ++l) {
        names.push_back("w" + std::to_string(l));
        names.push_back("b" + std::to_string(l));
    }
    names.push_back("cond_embed");
    return names;
}

std::size_t Denoiser::param_count() const {
    std::size_t n = 0;
    for (const auto& p : params_) n += p.size();
    return n;
}

void Denoiser::set_params(std::vector<Tensor> p) {
    if (p.size() != params_.size()) throw Error("set_params: wrong tensor count");
    for (std::size_t i = 0; i < p.size(); ++i)
        if (p[i].shape != params_[i].shape) throw Error("set_params: shape mismatch");
    params_ = std::move(p);
}

void Denoiser::t_embedding(int t, float* out) const {
    const std::uint32_t half = cfg_.t_embed_dim / 2;
    for (std::uint32_t k = 0; k < half; ++k) {
        const double w = std::exp(-std::log(10000.0) * k / half);
        out[k] = static_cast<float>(std::sin(t * w));
        out[half + k] = static_cast<float>(std::cos(t * w));
    }
}

// a[j] += sum_i in[i] * W[i*out + j], vectorizable rank-1 updates
static void matvec_in_major(const float* w, const float* in, std::uint32_t nin,
                            std::uint32_t nout, float* acc) {
    for (std::uint32_t i = 0; i < nin; ++i) {
        const float xi = in[i];
        if (xi == 0.0f) continue;
        const float* row = w + static_cast<std::size_t>(i) * nout;
        for (std::uint32_t j = 0; j < nout; ++j) acc[j] += xi * row[j];
    }
}

void Denoiser::forward_trace(const Tensor& x_t, int t, int cond, Trace& tr) const {
    const std::uint32_t D = cfg_.image_dim();
    if (x_t.size() != D)
        throw std::invalid_argument("Denoiser: input size " + std::to_string(x_t.size()) +
                                    " does not match image dim " + std::to_string(D));
    if (t < 0 || t >= sched_.steps)
        throw std::invalid_argument("Denoiser: timestep out of range");
    if (cond < 0 || static_cast<std::uint32_t>(cond) >= cfg_.vocab())
        throw std::invalid_argument("Denoiser: condition id out of vocabulary");

    const std::uint32_t TE = cfg_.t_embed_dim, CE = cfg_.cond_embed_dim;
    std::vector<float> temb(TE);
    t_embedding(t, temb.data());
    const Tensor& ctab = params_.back();
    const float* cemb = ctab.data.data() + static_cast<std::size_t>(cond) * CE;

    const std::uint32_t L = cfg_.hidden_layers + 1;
    tr.inputs.assign(L, {});
    tr.pre.assign(cfg_.hidden_layers, {});
    tr.post.assign(cfg_.hidden_layers, {});

    const float* cur = x_t.data.data();
    std::uint32_t cur_n = D;
    for (std::uint32_t l = 0; l < L; ++l) {
        const std::uint32_t nin = layer_in(l), nout = layer_out(l);
        auto& in = tr.inputs[l];
        in.resize(nin);
        std::memcpy(in.data(), cur, cur_n * sizeof(float));
        if (l < cfg_.hidden_layers) {
            std::memcpy(in.data() + cur_n, temb.data(), TE * sizeof(float));
            std::memcpy(in.data() + cur_n + TE, cemb, CE * sizeof(float));
        }
        const Tensor& w = params_[2 * l];
        const Tensor& b = params_[2 * l + 1];
        std::vector<float> a(b.data.begin(), b.data.end());
        matvec_in_major(w.data.data(), in.data(), nin, nout, a.data());
        if (l < cfg_.hidden_layers) {
            tr.pre[l] = a;
            auto& h = tr.post[l];
            h.resize(nout);
            for (std::uint32_t j = 0; j < nout; ++j) h[j] = silu(a[j]);
            cur = h.data();
            cur_n = nout;
        } else {
            tr.y_raw = std::move(a);
        }
    }

    const float sa = static_cast<float>(std::sqrt(sched_.a_bar[t]));
    tr.y_skip.resize(D);
    tr.y_hat.resize(D);
    for (std::uint32_t j = 0; j < D; ++j) {
        const float y = sa * x_t[j] + tr.y_raw[j];
        tr.y_skip[j] = y;
        tr.y_hat[j] = y < -1.0f ? -1.0f : (y > 1.0f ? 1.0f : y);
    }
}

Tensor Denoiser::predict_image(const Tensor& x_t, int t, int cond) const {
    Trace tr;
    forward_trace(x_t, t, cond, tr);
    return Tensor(x_t.shape, std::vector<float>(tr.y_hat.begin(), tr.y_hat.end()));
}

Tensor Denoiser::predict(const Tensor& x_t, int t, int cond) const {
    Trace tr;
    forward_trace(x_t, t, cond, tr);
    const double ab = sched_.a_bar[t];
    const float sa = static_cast<float>(std::sqrt(ab));
    const float sb = static_cast<float>(std::sqrt(1.0 - ab));
    Tensor eps(x_t.shape);
    for (std::size_t j = 0; j < eps.size(); ++j)
        eps[j] = (x_t[j] - sa * tr.y_hat[j]) / sb;
    return eps;
}

std::vector<float> Denoiser::hidden_activations(const Tensor& x_t, int t, int cond,
                                                std::uint32_t layer) const {
    if (layer >= cfg_.hidden_layers)
        throw std::invalid_argument("hidden_activations: layer index out of range");
    Trace tr;
    forward_trace(x_t, t, cond, tr);
    return tr.post[layer];
}

Tensor forward_noise_at(const Tensor& x, const Tensor& eps, double a_bar) {
    if (!x.same_shape(eps))
        throw std::invalid_argument("forward_noise: x and eps shape mismatch");
    if (!(a_bar >= 0.0 && a_bar <= 1.0))
        throw std::invalid_argument("forward_noise: a_bar outside [0,1]");
    const float sa = static_cast<float>(std::sqrt(a_bar));
    const float sb = static_cast<float>(std::sqrt(1.0 - a_bar));
    Tensor r(x.shape);
    for (std::size_t i = 0; i < r.size(); ++i) r[i] = sa * x[i] + sb * eps[i];
    return r;
}

Tensor forward_noise(const Tensor& x, int t, const Tensor& eps, const NoiseSchedule& sched) {
    if (t < 0 || t >= sched.steps)
        throw std::invalid_argument("forward_noise: t out of range");
    return forward_noise_at(x, eps, sched.a_bar[t]);
}

double diffusion_loss(const Tensor& x, int t, const Tensor& eps, int cond,
                      const NoisePredictor& model, const NoiseSchedule& sched) {
    Tensor x_t = forward_noise(x, t, eps, sched);
    Tensor pred = model.predict(x_t, t, cond);
    double s = 0.0;
    for (std::size_t i = 0; i < eps.size(); ++i) {
        double d = static_cast<double>(pred[i]) - static_cast<double>(eps[i]);
        s += d * d;
    }
    return s / static_cast<double>(eps.size());
}

Tensor to_model_range(const Tensor& img01) {
    Tensor r(img01.shape);
    for (std::size_t i = 0; i < r.size(); ++i) r[i] = 2.0f * img01[i] - 1.0f;
    return r;
}

Tensor to_image_range(const Tensor& model) {
    Tensor r(model.shape);
    for (std::size_t i = 0; i < r.size(); ++i) {
        float v = 0.5f * (model[i] + 1.0f);
        r[i] = v < 0.0f ? 0.0f : (v > 1.0f ? 1.0f : v);
    }
    return r;
}

}  // namespace lsteer
