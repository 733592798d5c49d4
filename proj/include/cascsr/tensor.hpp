#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "cascsr/errors.hpp"
#include "cascsr/image.hpp"

namespace cascsr {

// Dense NCHW tensor of doubles. Double precision throughout: the gradient
// checks and bit-reproducibility contracts depend on it.
class Tensor4 {
public:
    Tensor4() = default;
    Tensor4(int n, int c, int h, int w, double fill = 0.0)
        : n_(n), c_(c), h_(h), w_(w), data_(check(n, c, h, w), fill) {}

    int n() const { return n_; }
    int c() const { return c_; }
    int h() const { return h_; }
    int w() const { return w_; }
    std::size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    double& at(int n, int c, int h, int w) { return data_[index(n, c, h, w)]; }
    double at(int n, int c, int h, int w) const { return data_[index(n, c, h, w)]; }

    std::vector<double>& data() { return data_; }
    const std::vector<double>& data() const { return data_; }

    bool same_shape(const Tensor4& o) const {
        return n_ == o.n_ && c_ == o.c_ && h_ == o.h_ && w_ == o.w_;
    }

    bool all_finite() const {
        for (double v : data_)
            if (!std::isfinite(v)) return false;
        return true;
    }

    void fill(double v) { data_.assign(data_.size(), v); }

    Tensor4& operator+=(const Tensor4& o) {
        if (!same_shape(o)) throw ParameterError("Tensor4 +=: shape mismatch");
        for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
        return *this;
    }

    Tensor4& operator-=(const Tensor4& o) {
        if (!same_shape(o)) throw ParameterError("Tensor4 -=: shape mismatch");
        for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= o.data_[i];
        return *this;
    }

private:
    std::size_t index(int n, int c, int h, int w) const {
        return ((static_cast<std::size_t>(n) * c_ + c) * h_ + h) * w_ + w;
    }
    static std::size_t check(int n, int c, int h, int w) {
        if (n < 1 || c < 1 || h < 1 || w < 1) throw ParameterError("Tensor4: dimensions must be positive");
        return static_cast<std::size_t>(n) * c * h * w;
    }

    int n_ = 0, c_ = 0, h_ = 0, w_ = 0;
    std::vector<double> data_;
};

inline double dot(const Tensor4& a, const Tensor4& b) {
    if (!a.same_shape(b)) throw ParameterError("dot: tensor shape mismatch");
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += a.data()[i] * b.data()[i];
    return acc;
}

// Single-image plane <-> batch-of-one tensor.
inline Tensor4 to_tensor(const ImagePlane& img) {
    Tensor4 t(1, 1, img.height(), img.width());
    t.data() = img.data();
    return t;
}

inline ImagePlane to_image(const Tensor4& t, int n = 0, int c = 0) {
    ImagePlane img(t.h(), t.w());
    for (int i = 0; i < t.h(); ++i)
        for (int j = 0; j < t.w(); ++j) img.at(i, j) = t.at(n, c, i, j);
    return img;
}

inline Tensor4 concat_channels(const Tensor4& a, const Tensor4& b) {
    if (a.n() != b.n() || a.h() != b.h() || a.w() != b.w())
        throw ParameterError("concat_channels: shape mismatch");
    Tensor4 out(a.n(), a.c() + b.c(), a.h(), a.w());
    for (int n = 0; n < a.n(); ++n) {
        for (int c = 0; c < a.c(); ++c)
            for (int i = 0; i < a.h(); ++i)
                for (int j = 0; j < a.w(); ++j) out.at(n, c, i, j) = a.at(n, c, i, j);
        for (int c = 0; c < b.c(); ++c)
            for (int i = 0; i < b.h(); ++i)
                for (int j = 0; j < b.w(); ++j) out.at(n, a.c() + c, i, j) = b.at(n, c, i, j);
    }
    return out;
}

// Splits a gradient w.r.t. concat_channels(a, b) back into the two parts.
inline void split_channels(const Tensor4& grad, int c_first, Tensor4& grad_a, Tensor4& grad_b) {
    grad_a = Tensor4(grad.n(), c_first, grad.h(), grad.w());
    grad_b = Tensor4(grad.n(), grad.c() - c_first, grad.h(), grad.w());
    for (int n = 0; n < grad.n(); ++n) {
        for (int c = 0; c < c_first; ++c)
            for (int i = 0; i < grad.h(); ++i)
                for (int j = 0; j < grad.w(); ++j) grad_a.at(n, c, i, j) = grad.at(n, c, i, j);
        for (int c = c_first; c < grad.c(); ++c)
            for (int i = 0; i < grad.h(); ++i)
                for (int j = 0; j < grad.w(); ++j) grad_b.at(n, c - c_first, i, j) = grad.at(n, c, i, j);
    }
}

}  // namespace cascsr
