#include "lsteer/rng.hpp"

#include <cmath>

namespace lsteer {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

void RngState::reseed(std::uint64_t sd) {
    seed = sd;
    std::uint64_t x = sd;
    for (auto& si : s) {
        x += 0x9E3779B97F4A7C15ULL;
        std::uint64_t z = x;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        si = z ^ (z >> 31);
    }
    have_spare_ = false;
}

static inline std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
}

std::uint64_t RngState::next_u64() {
    const std::uint64_t result = rotl(s[0] + s[3], 23) + s[0];
    const std::uint64_t t = s[1] << 17;
    s[2] ^= s[0];
    s[3] ^= s[1];
    s[1] ^= s[2];
    s[0] ^= s[3];
    s[2] ^= t;
    s[3] = rotl(s[3], 45);
    return result;
}

double RngState::uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

std::uint64_t RngState::below(std::uint64_t n) {
    return n ? next_u64() % n : 0;
}

double RngState::gaussian() {
    if (have_spare_) {
        have_spare_ = false;
        return spare_;
    }
    // u1 in (0, 1] so the log is finite.
    double u1 = 1.0 - uniform();
    double u2 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    double a = 2.0 * 3.14159265358979323846 * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
}

RngState RngState::derive(std::uint64_t stream) const {
    return RngState(splitmix64(seed ^ (0x9E3779B97F4A7C15ULL * (stream + 1))));
}

Tensor gaussian(RngState& rng, const std::vector<std::uint32_t>& shape) {
    if (shape.empty())
        throw std::invalid_argument("gaussian: empty shape");
    for (auto e : shape)
        if (e == 0) throw std::invalid_argument("gaussian: zero extent in shape");
    Tensor t(shape);
    for (auto& v : t.data) v = static_cast<float>(rng.gaussian());
    return t;
}

}  // namespace lsteer
