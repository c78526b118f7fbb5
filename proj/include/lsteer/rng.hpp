#pragma once

#include <cstdint>

#include "lsteer/tensor.hpp"

namespace lsteer {

// Deterministic seedable PRNG. Algorithm is fixed so identical seeds give
// identical streams on every platform:
//   state init: four rounds of splitmix64 over the seed (Vigna's recipe)
//   stream:     xoshiro256++
//   uniforms:   53-bit mantissa mapped to [0, 1)
//   gaussians:  Box-Muller pairs from (1 - u1, u2)
// A single RngState is single-owner; parallel work derives independent
// streams with derive().
struct RngState {
    std::uint64_t seed = 0;
    std::uint64_t s[4] = {0, 0, 0, 0};

    RngState() { reseed(0); }
    explicit RngState(std::uint64_t sd) { reseed(sd); }

    void reseed(std::uint64_t sd);

    std::uint64_t next_u64();
    // Uniform in [0, 1).
    double uniform();
    // Uniform integer in [0, n). Modulo draw; bias is negligible for the
    // small n used here and keeps the stream layout simple.
    std::uint64_t below(std::uint64_t n);
    double gaussian();

    // Independent child stream: seed' = splitmix64(seed ^ GOLDEN * (stream+1)).
    RngState derive(std::uint64_t stream) const;

  private:
    bool have_spare_ = false;
    double spare_ = 0.0;
};

std::uint64_t splitmix64(std::uint64_t x);

// Tensor of i.i.d. standard normals. Zero-extent or empty shape throws.
Tensor gaussian(RngState& rng, const std::vector<std::uint32_t>& shape);

}  // namespace lsteer
