#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace lsteer {

// Dense row-major f32 tensor. Carrier for images, latents and weights.
// Public operations keep every element finite; violations throw.
struct Tensor {
    std::vector<std::uint32_t> shape;
    std::vector<float> data;

    Tensor() = default;
    explicit Tensor(std::vector<std::uint32_t> s);
    Tensor(std::vector<std::uint32_t> s, std::vector<float> d);

    std::size_t size() const { return data.size(); }
    std::size_t rank() const { return shape.size(); }
    float& operator[](std::size_t i) { return data[i]; }
    float operator[](std::size_t i) const { return data[i]; }

    bool same_shape(const Tensor& o) const { return shape == o.shape; }
    std::string shape_str() const;

    static Tensor zeros(std::vector<std::uint32_t> s) { return Tensor(std::move(s)); }
    static Tensor full(std::vector<std::uint32_t> s, float v);
};

std::size_t shape_numel(const std::vector<std::uint32_t>& shape);

// Throws std::invalid_argument if any element is NaN/Inf.
void ensure_finite(const Tensor& t, const char* what);

// Elementwise arithmetic; shapes must match.
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, float c);
// y += c * x
void axpy(float c, const Tensor& x, Tensor& y);

// Reductions accumulate in double for a stable, order-fixed result.
double dot(const Tensor& a, const Tensor& b);
double norm2(const Tensor& a);

// dot(a,b) / (|a||b|), clamped to [-1, 1]. Zero-norm input throws.
double cosine_sim(const Tensor& a, const Tensor& b);

// |a - b|_2 / sqrt(numel). Shape mismatch throws.
double l2_normed(const Tensor& a, const Tensor& b);

}  // namespace lsteer
