#include "lsteer/tensor.hpp"

#include <cmath>
#include <sstream>

namespace lsteer {

std::size_t shape_numel(const std::vector<std::uint32_t>& shape) {
    std::size_t n = 1;
    for (auto e : shape) n *= e;
    return n;
}

Tensor::Tensor(std::vector<std::uint32_t> s) : shape(std::move(s)) {
    data.assign(shape_numel(shape), 0.0f);
}

Tensor::Tensor(std::vector<std::uint32_t> s, std::vector<float> d)
    : shape(std::move(s)), data(std::move(d)) {
    if (shape_numel(shape) != data.size())
        throw std::invalid_argument("Tensor: shape does not match buffer length");
}

Tensor Tensor::full(std::vector<std::uint32_t> s, float v) {
    Tensor t(std::move(s));
    for (auto& x : t.data) x = v;
    return t;
}

std::string Tensor::shape_str() const {
    std::ostringstream os;
    os << "[";
    for (std::size_t i = 0; i < shape.size(); ++i) os << (i ? "," : "") << shape[i];
    os << "]";
    return os.str();
}

void ensure_finite(const Tensor& t, const char* what) {
    for (float v : t.data)
        if (!std::isfinite(v))
            throw std::invalid_argument(std::string(what) + ": non-finite element");
}

static void check_same_shape(const Tensor& a, const Tensor& b, const char* op) {
    if (!a.same_shape(b))
        throw std::invalid_argument(std::string(op) + ": shape mismatch " + a.shape_str() +
                                    " vs " + b.shape_str());
}

Tensor add(const Tensor& a, const Tensor& b) {
    check_same_shape(a, b, "add");
    Tensor r = a;
    for (std::size_t i = 0; i < r.size(); ++i) r[i] += b[i];
    return r;
}

Tensor sub(const Tensor& a, const Tensor& b) {
    check_same_shape(a, b, "sub");
    Tensor r = a;
    for (std::size_t i = 0; i < r.size(); ++i) r[i] -= b[i];
    return r;
}

Tensor scale(const Tensor& a, float c) {
    Tensor r = a;
    for (auto& v : r.data) v *= c;
    return r;
}

void axpy(float c, const Tensor& x, Tensor& y) {
    check_same_shape(x, y, "axpy");
    for (std::size_t i = 0; i < y.size(); ++i) y[i] += c * x[i];
}

double dot(const Tensor& a, const Tensor& b) {
    check_same_shape(a, b, "dot");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        s += static_cast<double>(a[i]) * static_cast<double>(b[i]);
    return s;
}

double norm2(const Tensor& a) {
    double s = 0.0;
    for (float v : a.data) s += static_cast<double>(v) * static_cast<double>(v);
    return std::sqrt(s);
}

double cosine_sim(const Tensor& a, const Tensor& b) {
    double na = norm2(a), nb = norm2(b);
    if (na == 0.0 || nb == 0.0)
        throw std::invalid_argument("cosine_sim: zero-norm input");
    double c = dot(a, b) / (na * nb);
    if (c > 1.0) c = 1.0;
    if (c < -1.0) c = -1.0;
    return c;
}

double l2_normed(const Tensor& a, const Tensor& b) {
    check_same_shape(a, b, "l2_normed");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        double d = static_cast<double>(a[i]) - static_cast<double>(b[i]);
        s += d * d;
    }
    return std::sqrt(s / static_cast<double>(a.size()));
}

}  // namespace lsteer
