#pragma once

#include <string>
#include <vector>

#include "cascsr/errors.hpp"
#include "cascsr/rng.hpp"
#include "cascsr/tensor.hpp"

namespace cascsr {

// One convolutional layer's parameters. The same struct backs transposed
// convolutions: weights keep the conv layout (out_ch, in_ch, kH, kW), and
// deconv2d reads it as the exact transpose map, so a deconv's input channel
// count is weights.n() and its output count is weights.c().
//
// `slopes` holds per-channel parametric-rectifier coefficients; leave empty
// for a linear layer.
struct LayerParams {
    Tensor4 weights;            // (out_ch, in_ch, kH, kW)
    std::vector<double> bias;   // per output channel of the mapping
    int stride = 1;
    int padding = 0;
    std::vector<double> slopes;

    void validate() const {
        if (weights.h() != weights.w()) throw ParameterError("LayerParams: kernel must be square");
        if (stride < 1) throw ParameterError("LayerParams: stride must be >= 1");
        if (padding < 0) throw ParameterError("LayerParams: negative padding");
    }
};

inline int conv_output_size(int in, int k, int stride, int pad) {
    const int span = in + 2 * pad - k;
    if (span < 0 || span % stride != 0)
        throw ParameterError("conv2d: (H + 2*pad - k) must be divisible by stride");
    return span / stride + 1;
}

inline int deconv_output_size(int in, int k, int stride, int pad) {
    const int out = (in - 1) * stride - 2 * pad + k;
    if (out < 1) throw ParameterError("deconv2d: output dimensions vanish");
    return out;
}

// Strided cross-correlation with zero padding plus bias:
// out(n,co,i,j) = b(co) + sum_{ci,a,b} W(co,ci,a,b) x(n,ci, i*s+a-p, j*s+b-p).
inline Tensor4 conv2d(const Tensor4& input, const LayerParams& p) {
    p.validate();
    const Tensor4& W = p.weights;
    if (input.c() != W.c()) throw ParameterError("conv2d: channel mismatch");
    if (!p.bias.empty() && static_cast<int>(p.bias.size()) != W.n())
        throw ParameterError("conv2d: bias length mismatch");
    const int k = W.h(), s = p.stride, pad = p.padding;
    const int oh = conv_output_size(input.h(), k, s, pad);
    const int ow = conv_output_size(input.w(), k, s, pad);

    Tensor4 out(input.n(), W.n(), oh, ow);
    for (int n = 0; n < input.n(); ++n) {
        for (int co = 0; co < W.n(); ++co) {
            const double bias = p.bias.empty() ? 0.0 : p.bias[co];
            for (int i = 0; i < oh; ++i) {
                for (int j = 0; j < ow; ++j) {
                    double acc = bias;
                    for (int ci = 0; ci < input.c(); ++ci) {
                        for (int a = 0; a < k; ++a) {
                            const int y = i * s + a - pad;
                            if (y < 0 || y >= input.h()) continue;
                            for (int b = 0; b < k; ++b) {
                                const int x = j * s + b - pad;
                                if (x < 0 || x >= input.w()) continue;
                                acc += W.at(co, ci, a, b) * input.at(n, ci, y, x);
                            }
                        }
                    }
                    out.at(n, co, i, j) = acc;
                }
            }
        }
    }
    return out;
}

struct ConvGrads {
    Tensor4 input;
    Tensor4 weights;
    std::vector<double> bias;
};

inline ConvGrads conv2d_backward(const Tensor4& grad_out, const Tensor4& input, const LayerParams& p) {
    p.validate();
    const Tensor4& W = p.weights;
    const int k = W.h(), s = p.stride, pad = p.padding;

    ConvGrads g;
    g.input = Tensor4(input.n(), input.c(), input.h(), input.w());
    g.weights = Tensor4(W.n(), W.c(), k, k);
    g.bias.assign(static_cast<std::size_t>(W.n()), 0.0);

    for (int n = 0; n < input.n(); ++n) {
        for (int co = 0; co < W.n(); ++co) {
            for (int i = 0; i < grad_out.h(); ++i) {
                for (int j = 0; j < grad_out.w(); ++j) {
                    const double go = grad_out.at(n, co, i, j);
                    g.bias[co] += go;
                    for (int ci = 0; ci < input.c(); ++ci) {
                        for (int a = 0; a < k; ++a) {
                            const int y = i * s + a - pad;
                            if (y < 0 || y >= input.h()) continue;
                            for (int b = 0; b < k; ++b) {
                                const int x = j * s + b - pad;
                                if (x < 0 || x >= input.w()) continue;
                                g.input.at(n, ci, y, x) += W.at(co, ci, a, b) * go;
                                g.weights.at(co, ci, a, b) += input.at(n, ci, y, x) * go;
                            }
                        }
                    }
                }
            }
        }
    }
    return g;
}

// Transposed convolution: the exact linear adjoint of conv2d with the same
// weights (zero bias), plus its own per-output-channel bias. Input channels
// index weights.n(); output channels index weights.c().
inline Tensor4 deconv2d(const Tensor4& input, const LayerParams& p) {
    p.validate();
    const Tensor4& W = p.weights;
    if (input.c() != W.n()) throw ParameterError("deconv2d: channel mismatch");
    if (!p.bias.empty() && static_cast<int>(p.bias.size()) != W.c())
        throw ParameterError("deconv2d: bias length mismatch");
    const int k = W.h(), s = p.stride, pad = p.padding;
    const int oh = deconv_output_size(input.h(), k, s, pad);
    const int ow = deconv_output_size(input.w(), k, s, pad);

    Tensor4 out(input.n(), W.c(), oh, ow);
    if (!p.bias.empty())
        for (int n = 0; n < out.n(); ++n)
            for (int q = 0; q < out.c(); ++q)
                for (int i = 0; i < oh; ++i)
                    for (int j = 0; j < ow; ++j) out.at(n, q, i, j) = p.bias[q];

    for (int n = 0; n < input.n(); ++n) {
        for (int c = 0; c < input.c(); ++c) {
            for (int i = 0; i < input.h(); ++i) {
                for (int j = 0; j < input.w(); ++j) {
                    const double v = input.at(n, c, i, j);
                    for (int q = 0; q < W.c(); ++q) {
                        for (int a = 0; a < k; ++a) {
                            const int y = i * s + a - pad;
                            if (y < 0 || y >= oh) continue;
                            for (int b = 0; b < k; ++b) {
                                const int x = j * s + b - pad;
                                if (x < 0 || x >= ow) continue;
                                out.at(n, q, y, x) += W.at(c, q, a, b) * v;
                            }
                        }
                    }
                }
            }
        }
    }
    return out;
}

inline ConvGrads deconv2d_backward(const Tensor4& grad_out, const Tensor4& input,
                                   const LayerParams& p) {
    p.validate();
    const Tensor4& W = p.weights;
    const int k = W.h(), s = p.stride, pad = p.padding;

    ConvGrads g;
    g.input = Tensor4(input.n(), input.c(), input.h(), input.w());
    g.weights = Tensor4(W.n(), W.c(), k, k);
    g.bias.assign(static_cast<std::size_t>(W.c()), 0.0);

    for (int n = 0; n < grad_out.n(); ++n)
        for (int q = 0; q < grad_out.c(); ++q)
            for (int i = 0; i < grad_out.h(); ++i)
                for (int j = 0; j < grad_out.w(); ++j) g.bias[q] += grad_out.at(n, q, i, j);

    for (int n = 0; n < input.n(); ++n) {
        for (int c = 0; c < input.c(); ++c) {
            for (int i = 0; i < input.h(); ++i) {
                for (int j = 0; j < input.w(); ++j) {
                    const double v = input.at(n, c, i, j);
                    double acc = 0.0;
                    for (int q = 0; q < W.c(); ++q) {
                        for (int a = 0; a < k; ++a) {
                            const int y = i * s + a - pad;
                            if (y < 0 || y >= grad_out.h()) continue;
                            for (int b = 0; b < k; ++b) {
                                const int x = j * s + b - pad;
                                if (x < 0 || x >= grad_out.w()) continue;
                                const double go = grad_out.at(n, q, y, x);
                                acc += W.at(c, q, a, b) * go;
                                g.weights.at(c, q, a, b) += v * go;
                            }
                        }
                    }
                    g.input.at(n, c, i, j) = acc;
                }
            }
        }
    }
    return g;
}

// Per-channel parametric rectifier: x for x > 0, slope_c * x otherwise.
inline Tensor4 prelu(const Tensor4& input, const std::vector<double>& slopes) {
    if (static_cast<int>(slopes.size()) != input.c())
        throw ParameterError("prelu: one slope per channel required");
    Tensor4 out = input;
    for (int n = 0; n < input.n(); ++n)
        for (int c = 0; c < input.c(); ++c)
            for (int i = 0; i < input.h(); ++i)
                for (int j = 0; j < input.w(); ++j) {
                    double& v = out.at(n, c, i, j);
                    if (v <= 0.0) v *= slopes[c];
                }
    return out;
}

struct PreluGrads {
    Tensor4 input;
    std::vector<double> slopes;
};

inline PreluGrads prelu_backward(const Tensor4& grad_out, const Tensor4& input,
                                 const std::vector<double>& slopes) {
    PreluGrads g;
    g.input = Tensor4(input.n(), input.c(), input.h(), input.w());
    g.slopes.assign(slopes.size(), 0.0);
    for (int n = 0; n < input.n(); ++n)
        for (int c = 0; c < input.c(); ++c)
            for (int i = 0; i < input.h(); ++i)
                for (int j = 0; j < input.w(); ++j) {
                    const double x = input.at(n, c, i, j);
                    const double go = grad_out.at(n, c, i, j);
                    if (x > 0.0) {
                        g.input.at(n, c, i, j) = go;
                    } else {
                        g.input.at(n, c, i, j) = slopes[c] * go;
                        g.slopes[c] += x * go;
                    }
                }
    return g;
}

// Fan-in-scaled Gaussian init for rectifier networks; biases zero, slopes 0.25.
inline LayerParams make_layer(int out_ch, int in_ch, int k, int stride, int padding, Rng& rng,
                              bool with_activation = true) {
    LayerParams p;
    p.weights = Tensor4(out_ch, in_ch, k, k);
    const double stddev = std::sqrt(2.0 / (static_cast<double>(in_ch) * k * k));
    for (double& w : p.weights.data()) w = stddev * rng.normal();
    p.bias.assign(static_cast<std::size_t>(out_ch), 0.0);
    p.stride = stride;
    p.padding = padding;
    if (with_activation) p.slopes.assign(static_cast<std::size_t>(out_ch), 0.25);
    return p;
}

// Deconv variant: bias and slopes sized for the deconv output (weights.c()).
inline LayerParams make_deconv_layer(int in_ch, int out_ch, int k, int stride, int padding, Rng& rng,
                                     bool with_activation = true) {
    LayerParams p;
    p.weights = Tensor4(in_ch, out_ch, k, k);
    const double stddev = std::sqrt(2.0 / (static_cast<double>(in_ch) * k * k));
    for (double& w : p.weights.data()) w = stddev * rng.normal();
    p.bias.assign(static_cast<std::size_t>(out_ch), 0.0);
    p.stride = stride;
    p.padding = padding;
    if (with_activation) p.slopes.assign(static_cast<std::size_t>(out_ch), 0.25);
    return p;
}

}  // namespace cascsr
