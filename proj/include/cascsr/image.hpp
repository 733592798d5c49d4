#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "cascsr/errors.hpp"

namespace cascsr {

// 2D intensity grid, row-major doubles, nominal range [0,1]. The universal
// image carrier: HR estimates, LR observations, gradient channels all live
// in this type.
class ImagePlane {
public:
    ImagePlane() = default;
    ImagePlane(int height, int width, double fill = 0.0)
        : height_(height), width_(width), data_(check_dims(height, width), fill) {}
    ImagePlane(int height, int width, std::vector<double> data)
        : height_(height), width_(width), data_(std::move(data)) {
        if (data_.size() != check_dims(height, width))
            throw ParameterError("ImagePlane: data length does not match dimensions");
    }

    int height() const { return height_; }
    int width() const { return width_; }
    std::size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    double& at(int row, int col) { return data_[static_cast<std::size_t>(row) * width_ + col]; }
    double at(int row, int col) const { return data_[static_cast<std::size_t>(row) * width_ + col]; }

    // Circularly wrapped access; row/col may be any integer.
    double wrap(int row, int col) const {
        return data_[static_cast<std::size_t>(mod(row, height_)) * width_ + mod(col, width_)];
    }
    double& wrap_ref(int row, int col) {
        return data_[static_cast<std::size_t>(mod(row, height_)) * width_ + mod(col, width_)];
    }

    std::vector<double>& data() { return data_; }
    const std::vector<double>& data() const { return data_; }

    bool same_shape(const ImagePlane& other) const {
        return height_ == other.height_ && width_ == other.width_;
    }

    bool all_finite() const {
        for (double v : data_)
            if (!std::isfinite(v)) return false;
        return true;
    }

    static int mod(int a, int n) {
        int r = a % n;
        return r < 0 ? r + n : r;
    }

private:
    static std::size_t check_dims(int height, int width) {
        if (height <= 0 || width <= 0)
            throw ParameterError("ImagePlane: dimensions must be positive");
        return static_cast<std::size_t>(height) * static_cast<std::size_t>(width);
    }

    int height_ = 0;
    int width_ = 0;
    std::vector<double> data_;
};

// Square convolution kernel of odd side 2*radius+1.
class Kernel2D {
public:
    Kernel2D(int radius, std::vector<double> weights) : radius_(radius), weights_(std::move(weights)) {
        if (radius < 0) throw ParameterError("Kernel2D: negative radius");
        const std::size_t side = 2 * static_cast<std::size_t>(radius) + 1;
        if (weights_.size() != side * side)
            throw ParameterError("Kernel2D: weight count does not match radius");
    }

    int radius() const { return radius_; }
    int side() const { return 2 * radius_ + 1; }

    // Weight at offset (dy, dx), each in [-radius, radius].
    double at(int dy, int dx) const {
        return weights_[static_cast<std::size_t>(dy + radius_) * side() + (dx + radius_)];
    }
    double& at(int dy, int dx) {
        return weights_[static_cast<std::size_t>(dy + radius_) * side() + (dx + radius_)];
    }

    const std::vector<double>& weights() const { return weights_; }

    // Kronecker delta: convolution identity.
    static Kernel2D delta() {
        return Kernel2D(0, {1.0});
    }

private:
    int radius_;
    std::vector<double> weights_;
};

// Forward-difference gradient channels, same dimensions as the source image.
struct GradientPair {
    ImagePlane gx;  // horizontal: img(i, j+1) - img(i, j)
    ImagePlane gy;  // vertical:   img(i+1, j) - img(i, j)
};

// Sampled isotropic Gaussian, normalized to unit sum.
inline Kernel2D gaussian_kernel(double sigma, int radius) {
    if (!(sigma > 0.0)) throw ParameterError("gaussian_kernel: sigma must be positive");
    if (radius < 1) throw ParameterError("gaussian_kernel: radius must be >= 1");
    const int side = 2 * radius + 1;
    std::vector<double> w(static_cast<std::size_t>(side) * side);
    double sum = 0.0;
    for (int dy = -radius; dy <= radius; ++dy) {
        for (int dx = -radius; dx <= radius; ++dx) {
            const double v = std::exp(-(dy * dy + dx * dx) / (2.0 * sigma * sigma));
            w[static_cast<std::size_t>(dy + radius) * side + (dx + radius)] = v;
            sum += v;
        }
    }
    for (double& v : w) v /= sum;
    return Kernel2D(radius, std::move(w));
}

namespace detail {
inline void require_kernel_fits(const ImagePlane& img, const Kernel2D& k, const char* op) {
    if (k.side() > img.height() || k.side() > img.width())
        throw ParameterError(std::string(op) + ": kernel larger than image");
}
}  // namespace detail

// Circular (periodic) convolution: out(i,j) = sum_k k(a,b) img(i-a, j-b).
inline ImagePlane convolve_circular(const ImagePlane& img, const Kernel2D& k) {
    detail::require_kernel_fits(img, k, "convolve_circular");
    const int h = img.height(), w = img.width(), r = k.radius();
    ImagePlane out(h, w);
    for (int i = 0; i < h; ++i) {
        for (int j = 0; j < w; ++j) {
            double acc = 0.0;
            for (int a = -r; a <= r; ++a)
                for (int b = -r; b <= r; ++b)
                    acc += k.at(a, b) * img.wrap(i - a, j - b);
            out.at(i, j) = acc;
        }
    }
    return out;
}

// Circular correlation, the exact adjoint of convolve_circular with the same
// kernel: out(i,j) = sum_k k(a,b) img(i+a, j+b).
inline ImagePlane correlate_circular(const ImagePlane& img, const Kernel2D& k) {
    detail::require_kernel_fits(img, k, "correlate_circular");
    const int h = img.height(), w = img.width(), r = k.radius();
    ImagePlane out(h, w);
    for (int i = 0; i < h; ++i) {
        for (int j = 0; j < w; ++j) {
            double acc = 0.0;
            for (int a = -r; a <= r; ++a)
                for (int b = -r; b <= r; ++b)
                    acc += k.at(a, b) * img.wrap(i + a, j + b);
            out.at(i, j) = acc;
        }
    }
    return out;
}

// Translation by (dx, dy) pixels on the circularly extended grid. Content
// moves by +dx along columns and +dy along rows; fractional shifts use
// bilinear interpolation, so the map is linear in the image.
inline ImagePlane shift_subpixel(const ImagePlane& img, double dx, double dy) {
    const int h = img.height(), w = img.width();
    ImagePlane out(h, w);
    const double fy0 = std::floor(dy), fx0 = std::floor(dx);
    const double ty = dy - fy0, tx = dx - fx0;
    const int iy = static_cast<int>(fy0), ix = static_cast<int>(fx0);
    for (int i = 0; i < h; ++i) {
        for (int j = 0; j < w; ++j) {
            // source coordinate (i - dy, j - dx) split into integer and fraction
            const double v00 = img.wrap(i - iy, j - ix);
            const double v01 = img.wrap(i - iy, j - ix - 1);
            const double v10 = img.wrap(i - iy - 1, j - ix);
            const double v11 = img.wrap(i - iy - 1, j - ix - 1);
            out.at(i, j) = (1.0 - ty) * ((1.0 - tx) * v00 + tx * v01) + ty * ((1.0 - tx) * v10 + tx * v11);
        }
    }
    return out;
}

// Exact transpose of shift_subpixel: scatter with the same bilinear weights.
inline ImagePlane shift_subpixel_adjoint(const ImagePlane& img, double dx, double dy) {
    const int h = img.height(), w = img.width();
    ImagePlane out(h, w);
    const double fy0 = std::floor(dy), fx0 = std::floor(dx);
    const double ty = dy - fy0, tx = dx - fx0;
    const int iy = static_cast<int>(fy0), ix = static_cast<int>(fx0);
    for (int i = 0; i < h; ++i) {
        for (int j = 0; j < w; ++j) {
            const double v = img.at(i, j);
            out.wrap_ref(i - iy, j - ix) += (1.0 - ty) * (1.0 - tx) * v;
            out.wrap_ref(i - iy, j - ix - 1) += (1.0 - ty) * tx * v;
            out.wrap_ref(i - iy - 1, j - ix) += ty * (1.0 - tx) * v;
            out.wrap_ref(i - iy - 1, j - ix - 1) += ty * tx * v;
        }
    }
    return out;
}

// Keeps samples at (s*i, s*j); phase offset 0.
inline ImagePlane decimate(const ImagePlane& img, int s) {
    if (s < 1) throw ParameterError("decimate: scale must be >= 1");
    if (img.height() % s != 0 || img.width() % s != 0)
        throw ParameterError("decimate: dimensions not divisible by scale");
    const int oh = img.height() / s, ow = img.width() / s;
    ImagePlane out(oh, ow);
    for (int i = 0; i < oh; ++i)
        for (int j = 0; j < ow; ++j)
            out.at(i, j) = img.at(i * s, j * s);
    return out;
}

// Zero-insertion transpose of decimate.
inline ImagePlane upsample_zero(const ImagePlane& img, int s) {
    if (s < 1) throw ParameterError("upsample_zero: scale must be >= 1");
    ImagePlane out(img.height() * s, img.width() * s);
    for (int i = 0; i < img.height(); ++i)
        for (int j = 0; j < img.width(); ++j)
            out.at(i * s, j * s) = img.at(i, j);
    return out;
}

namespace detail {
// Cubic convolution weight, a = -0.5 (Catmull-Rom).
inline double cubic_weight(double t) {
    const double a = -0.5;
    t = std::fabs(t);
    if (t <= 1.0) return ((a + 2.0) * t - (a + 3.0)) * t * t + 1.0;
    if (t < 2.0) return a * (((t - 5.0) * t + 8.0) * t - 4.0);
    return 0.0;
}

inline int clamp_index(int v, int n) { return std::clamp(v, 0, n - 1); }
}  // namespace detail

// Cubic-convolution resize with edge replication. Display-path resampler,
// also the solver initialization; not part of the adjoint-exact operator set.
inline ImagePlane resize_bicubic(const ImagePlane& img, double scale) {
    if (!(scale > 0.0)) throw ParameterError("resize_bicubic: scale must be positive");
    const int oh = static_cast<int>(std::lround(scale * img.height()));
    const int ow = static_cast<int>(std::lround(scale * img.width()));
    if (oh < 1 || ow < 1) throw ParameterError("resize_bicubic: output dimensions vanish");
    ImagePlane out(oh, ow);
    const double sy = static_cast<double>(img.height()) / oh;
    const double sx = static_cast<double>(img.width()) / ow;
    for (int i = 0; i < oh; ++i) {
        const double src_y = (i + 0.5) * sy - 0.5;
        const int y0 = static_cast<int>(std::floor(src_y));
        double wy[4];
        for (int a = 0; a < 4; ++a) wy[a] = detail::cubic_weight(src_y - (y0 - 1 + a));
        for (int j = 0; j < ow; ++j) {
            const double src_x = (j + 0.5) * sx - 0.5;
            const int x0 = static_cast<int>(std::floor(src_x));
            double acc = 0.0;
            for (int a = 0; a < 4; ++a) {
                const int yy = detail::clamp_index(y0 - 1 + a, img.height());
                double row = 0.0;
                for (int b = 0; b < 4; ++b) {
                    const int xx = detail::clamp_index(x0 - 1 + b, img.width());
                    row += detail::cubic_weight(src_x - (x0 - 1 + b)) * img.at(yy, xx);
                }
                acc += wy[a] * row;
            }
            out.at(i, j) = acc;
        }
    }
    return out;
}

// Circular forward differences.
inline GradientPair gradient_forward(const ImagePlane& img) {
    const int h = img.height(), w = img.width();
    GradientPair g{ImagePlane(h, w), ImagePlane(h, w)};
    for (int i = 0; i < h; ++i) {
        for (int j = 0; j < w; ++j) {
            g.gx.at(i, j) = img.wrap(i, j + 1) - img.at(i, j);
            g.gy.at(i, j) = img.wrap(i + 1, j) - img.at(i, j);
        }
    }
    return g;
}

// Exact transpose of gradient_forward (negative circular divergence).
inline ImagePlane gradient_adjoint(const GradientPair& g) {
    if (!g.gx.same_shape(g.gy)) throw ParameterError("gradient_adjoint: channel shape mismatch");
    const int h = g.gx.height(), w = g.gx.width();
    ImagePlane out(h, w);
    for (int i = 0; i < h; ++i) {
        for (int j = 0; j < w; ++j) {
            out.at(i, j) = g.gx.wrap(i, j - 1) - g.gx.at(i, j) + g.gy.wrap(i - 1, j) - g.gy.at(i, j);
        }
    }
    return out;
}

inline ImagePlane clip01(ImagePlane img) {
    for (double& v : img.data()) v = std::clamp(v, 0.0, 1.0);
    return img;
}

struct RgbImage {
    ImagePlane r, g, b;
};

struct YcbcrImage {
    ImagePlane y, cb, cr;
};

// BT.601 full-range transform; chroma centered at 0.5 on the [0,1] scale.
inline YcbcrImage rgb_to_ycbcr(const RgbImage& rgb) {
    if (!rgb.r.same_shape(rgb.g) || !rgb.r.same_shape(rgb.b))
        throw ParameterError("rgb_to_ycbcr: channel shape mismatch");
    const int h = rgb.r.height(), w = rgb.r.width();
    YcbcrImage out{ImagePlane(h, w), ImagePlane(h, w), ImagePlane(h, w)};
    for (std::size_t i = 0; i < rgb.r.size(); ++i) {
        const double r = rgb.r.data()[i], g = rgb.g.data()[i], b = rgb.b.data()[i];
        out.y.data()[i] = 0.299 * r + 0.587 * g + 0.114 * b;
        out.cb.data()[i] = 0.5 + (-0.168735891647855786 * r - 0.331264108352144214 * g + 0.5 * b);
        out.cr.data()[i] = 0.5 + (0.5 * r - 0.418687589158345221 * g - 0.081312410841654779 * b);
    }
    return out;
}

inline RgbImage ycbcr_to_rgb(const YcbcrImage& ycc) {
    if (!ycc.y.same_shape(ycc.cb) || !ycc.y.same_shape(ycc.cr))
        throw ParameterError("ycbcr_to_rgb: channel shape mismatch");
    const int h = ycc.y.height(), w = ycc.y.width();
    RgbImage out{ImagePlane(h, w), ImagePlane(h, w), ImagePlane(h, w)};
    for (std::size_t i = 0; i < ycc.y.size(); ++i) {
        const double y = ycc.y.data()[i];
        const double cb = ycc.cb.data()[i] - 0.5;
        const double cr = ycc.cr.data()[i] - 0.5;
        out.r.data()[i] = y + 1.402 * cr;
        out.g.data()[i] = y - 0.344136286201022147 * cb - 0.714136286201022147 * cr;
        out.b.data()[i] = y + 1.772 * cb;
    }
    return out;
}

inline double dot(const ImagePlane& a, const ImagePlane& b) {
    if (!a.same_shape(b)) throw ParameterError("dot: shape mismatch");
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += a.data()[i] * b.data()[i];
    return acc;
}

}  // namespace cascsr
