#pragma once

#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "cascsr/errors.hpp"
#include "cascsr/image.hpp"
#include "cascsr/layers.hpp"
#include "cascsr/rng.hpp"
#include "cascsr/tensor.hpp"

namespace cascsr {

// Single-frame super-resolution network: shallow feature extraction, T
// up-projection units interleaved with T-1 downsampling units, dense
// connections folded by sequential feature fusion, and a global bicubic
// residual. All arithmetic is double precision with hand-written backward
// passes, so every gradient is exact and checkable by finite differences.

// Per-scale projection geometry.
struct ProjectionGeometry {
    int kernel = 0;
    int stride = 0;
    int padding = 0;
};

inline ProjectionGeometry projection_geometry(int scale) {
    if (scale == 2) return {6, 2, 2};
    if (scale == 4) return {8, 4, 2};
    throw ParameterError("projection_geometry: supported stage scales are 2 and 4");
}

// Sequential feature fusion: y^0 = 0, y^t = act(conv3x3([m^t ; y^{t-1}])).
// One fusion conv (2*n_f -> n_f) per input map; the first step concatenates
// with an explicit zero tensor so every fusion layer has the same shape.
struct SffParams {
    std::vector<LayerParams> fusion;
};

struct UpUnitParams {
    LayerParams deconv_a;  // LR -> HR
    LayerParams conv_b;    // HR -> LR
    LayerParams deconv_c;  // LR error -> HR correction
};

struct DownUnitParams {
    LayerParams conv;  // strided HR -> LR
};

struct ErbpnModel {
    int scale = 2;
    int unit_count = 3;  // T
    int n_features = 32;  // n_f
    int n_shallow = 64;   // n_0

    LayerParams init_conv;  // 3x3, 1 -> n_0
    LayerParams pool_conv;  // 1x1, n_0 -> n_f
    std::vector<SffParams> up_sff;      // [T], entry t fuses t+1 LR maps
    std::vector<UpUnitParams> up_units;  // [T]
    std::vector<SffParams> down_sff;    // [T-1], entry t fuses t+1 HR maps
    std::vector<DownUnitParams> down_units;  // [T-1]
    SffParams recon_sff;     // fuses the T HR maps
    LayerParams recon_conv;  // 3x3, n_f -> 1, linear

    void validate() const;
};

inline SffParams make_sff(int map_count, int n_f, Rng& rng) {
    SffParams sff;
    for (int t = 0; t < map_count; ++t) sff.fusion.push_back(make_layer(n_f, 2 * n_f, 3, 1, 1, rng));
    return sff;
}

inline ErbpnModel make_erbpn_model(int scale, int unit_count, int n_features, int n_shallow,
                                   std::uint64_t seed) {
    if (unit_count < 1) throw ParameterError("make_erbpn_model: unit_count must be >= 1");
    if (n_features < 1 || n_shallow < 1)
        throw ParameterError("make_erbpn_model: feature widths must be >= 1");
    const ProjectionGeometry geo = projection_geometry(scale);

    Rng rng(seed);
    ErbpnModel m;
    m.scale = scale;
    m.unit_count = unit_count;
    m.n_features = n_features;
    m.n_shallow = n_shallow;

    m.init_conv = make_layer(n_shallow, 1, 3, 1, 1, rng);
    m.pool_conv = make_layer(n_features, n_shallow, 1, 1, 0, rng);
    for (int t = 0; t < unit_count; ++t) {
        m.up_sff.push_back(make_sff(t + 1, n_features, rng));
        UpUnitParams up;
        up.deconv_a = make_deconv_layer(n_features, n_features, geo.kernel, geo.stride, geo.padding, rng);
        up.conv_b = make_layer(n_features, n_features, geo.kernel, geo.stride, geo.padding, rng);
        up.deconv_c = make_deconv_layer(n_features, n_features, geo.kernel, geo.stride, geo.padding, rng);
        m.up_units.push_back(std::move(up));
        if (t + 1 < unit_count) {
            m.down_sff.push_back(make_sff(t + 1, n_features, rng));
            DownUnitParams down;
            down.conv = make_layer(n_features, n_features, geo.kernel, geo.stride, geo.padding, rng);
            m.down_units.push_back(std::move(down));
        }
    }
    m.recon_sff = make_sff(unit_count, n_features, rng);
    m.recon_conv = make_layer(1, n_features, 3, 1, 1, rng, /*with_activation=*/false);
    return m;
}

inline void ErbpnModel::validate() const {
    if (unit_count < 1) throw ParameterError("ErbpnModel: unit_count must be >= 1");
    if (static_cast<int>(up_sff.size()) != unit_count ||
        static_cast<int>(up_units.size()) != unit_count ||
        static_cast<int>(down_sff.size()) != unit_count - 1 ||
        static_cast<int>(down_units.size()) != unit_count - 1 ||
        static_cast<int>(recon_sff.fusion.size()) != unit_count)
        throw ParameterError("ErbpnModel: unit table sizes inconsistent");
    for (int t = 0; t < unit_count; ++t)
        if (static_cast<int>(up_sff[t].fusion.size()) != t + 1)
            throw ParameterError("ErbpnModel: up_sff fusion count inconsistent");
    for (int t = 0; t + 1 < unit_count; ++t)
        if (static_cast<int>(down_sff[t].fusion.size()) != t + 1)
            throw ParameterError("ErbpnModel: down_sff fusion count inconsistent");
    projection_geometry(scale);
}

// Canonical layer enumeration in forward order. Serialization, the optimizer
// and the gradient structure all share this ordering.
template <typename Model, typename Fn>
void for_each_layer(Model& m, Fn&& fn) {
    fn(m.init_conv);
    fn(m.pool_conv);
    for (int t = 0; t < m.unit_count; ++t) {
        for (auto& layer : m.up_sff[t].fusion) fn(layer);
        fn(m.up_units[t].deconv_a);
        fn(m.up_units[t].conv_b);
        fn(m.up_units[t].deconv_c);
        if (t + 1 < m.unit_count) {
            for (auto& layer : m.down_sff[t].fusion) fn(layer);
            fn(m.down_units[t].conv);
        }
    }
    for (auto& layer : m.recon_sff.fusion) fn(layer);
    fn(m.recon_conv);
}

inline std::size_t parameter_count(const ErbpnModel& m) {
    std::size_t n = 0;
    for_each_layer(m, [&](const LayerParams& p) {
        n += p.weights.size() + p.bias.size() + p.slopes.size();
    });
    return n;
}

inline ErbpnModel zeros_like(const ErbpnModel& m) {
    ErbpnModel z = m;
    for_each_layer(z, [](LayerParams& p) {
        p.weights.fill(0.0);
        std::fill(p.bias.begin(), p.bias.end(), 0.0);
        std::fill(p.slopes.begin(), p.slopes.end(), 0.0);
    });
    return z;
}

// --- forward with trace -----------------------------------------------------

struct SffTrace {
    std::vector<Tensor4> cat_inputs;  // concat([m^t ; y^{t-1}]) per step
    std::vector<Tensor4> pre_act;     // conv output before activation
    Tensor4 output;
};

inline Tensor4 sff_forward(const std::vector<Tensor4>& maps, const SffParams& p, SffTrace* trace) {
    if (maps.empty()) throw ParameterError("sff: empty map list");
    if (maps.size() != p.fusion.size()) throw ParameterError("sff: map/fusion count mismatch");
    const Tensor4& first = maps.front();
    for (const auto& m : maps)
        if (!m.same_shape(first)) throw ParameterError("sff: map shape mismatch");

    Tensor4 y(first.n(), first.c(), first.h(), first.w());  // y^0 = 0
    for (std::size_t t = 0; t < maps.size(); ++t) {
        Tensor4 cat = concat_channels(maps[t], y);
        Tensor4 pre = conv2d(cat, p.fusion[t]);
        y = prelu(pre, p.fusion[t].slopes);
        if (trace) {
            trace->cat_inputs.push_back(std::move(cat));
            trace->pre_act.push_back(std::move(pre));
        }
    }
    if (trace) trace->output = y;
    return y;
}

inline Tensor4 sff(const std::vector<Tensor4>& maps, const SffParams& p) {
    return sff_forward(maps, p, nullptr);
}

// Backward through the fold. grad_maps[t] receives the gradient for map t;
// fusion-layer gradients are accumulated into grads.fusion.
inline void sff_backward(const Tensor4& grad_out, const SffTrace& trace, const SffParams& p,
                         SffParams& grads, std::vector<Tensor4>& grad_maps) {
    const int steps = static_cast<int>(p.fusion.size());
    grad_maps.assign(steps, Tensor4());
    Tensor4 dy = grad_out;
    for (int t = steps - 1; t >= 0; --t) {
        const PreluGrads pg = prelu_backward(dy, trace.pre_act[t], p.fusion[t].slopes);
        for (std::size_t i = 0; i < pg.slopes.size(); ++i) grads.fusion[t].slopes[i] += pg.slopes[i];
        const ConvGrads cg = conv2d_backward(pg.input, trace.cat_inputs[t], p.fusion[t]);
        grads.fusion[t].weights += cg.weights;
        for (std::size_t i = 0; i < cg.bias.size(); ++i) grads.fusion[t].bias[i] += cg.bias[i];
        Tensor4 dmap, dy_prev;
        split_channels(cg.input, trace.cat_inputs[t].c() / 2, dmap, dy_prev);
        grad_maps[t] = std::move(dmap);
        dy = std::move(dy_prev);  // gradient w.r.t. y^{t-1}; discarded at t=0 (y^0 = 0)
    }
}

struct UpUnitTrace {
    Tensor4 input;     // fused LR map
    Tensor4 pre_a;     // deconv_a output
    Tensor4 h0;        // act(pre_a)
    Tensor4 pre_b;     // conv_b output
    Tensor4 error;     // act(pre_b) - input
    Tensor4 pre_c;     // deconv_c output
    Tensor4 output;    // h0 + act(pre_c)
};

// Back-projection refinement: lift, re-project, lift the residual, sum.
inline Tensor4 up_unit_forward(const Tensor4& input, const UpUnitParams& p, UpUnitTrace* trace) {
    Tensor4 pre_a = deconv2d(input, p.deconv_a);
    Tensor4 h0 = prelu(pre_a, p.deconv_a.slopes);
    Tensor4 pre_b = conv2d(h0, p.conv_b);
    Tensor4 error = prelu(pre_b, p.conv_b.slopes);
    error -= input;
    Tensor4 pre_c = deconv2d(error, p.deconv_c);
    Tensor4 out = prelu(pre_c, p.deconv_c.slopes);
    out += h0;
    if (trace) {
        trace->input = input;
        trace->pre_a = std::move(pre_a);
        trace->h0 = std::move(h0);
        trace->pre_b = std::move(pre_b);
        trace->error = std::move(error);
        trace->pre_c = std::move(pre_c);
        trace->output = out;
    }
    return out;
}

inline Tensor4 up_projection_unit(const Tensor4& input, const UpUnitParams& p) {
    return up_unit_forward(input, p, nullptr);
}

inline Tensor4 up_unit_backward(const Tensor4& grad_out, const UpUnitTrace& trace,
                                const UpUnitParams& p, UpUnitParams& grads) {
    // out = h0 + act(pre_c)
    const PreluGrads pg_c = prelu_backward(grad_out, trace.pre_c, p.deconv_c.slopes);
    for (std::size_t i = 0; i < pg_c.slopes.size(); ++i) grads.deconv_c.slopes[i] += pg_c.slopes[i];
    const ConvGrads dg_c = deconv2d_backward(pg_c.input, trace.error, p.deconv_c);
    grads.deconv_c.weights += dg_c.weights;
    for (std::size_t i = 0; i < dg_c.bias.size(); ++i) grads.deconv_c.bias[i] += dg_c.bias[i];

    // error = act(pre_b) - input
    Tensor4 grad_input = dg_c.input;
    for (double& v : grad_input.data()) v = -v;

    const PreluGrads pg_b = prelu_backward(dg_c.input, trace.pre_b, p.conv_b.slopes);
    for (std::size_t i = 0; i < pg_b.slopes.size(); ++i) grads.conv_b.slopes[i] += pg_b.slopes[i];
    const ConvGrads cg_b = conv2d_backward(pg_b.input, trace.h0, p.conv_b);
    grads.conv_b.weights += cg_b.weights;
    for (std::size_t i = 0; i < cg_b.bias.size(); ++i) grads.conv_b.bias[i] += cg_b.bias[i];

    Tensor4 grad_h0 = grad_out;
    grad_h0 += cg_b.input;

    const PreluGrads pg_a = prelu_backward(grad_h0, trace.pre_a, p.deconv_a.slopes);
    for (std::size_t i = 0; i < pg_a.slopes.size(); ++i) grads.deconv_a.slopes[i] += pg_a.slopes[i];
    const ConvGrads dg_a = deconv2d_backward(pg_a.input, trace.input, p.deconv_a);
    grads.deconv_a.weights += dg_a.weights;
    for (std::size_t i = 0; i < dg_a.bias.size(); ++i) grads.deconv_a.bias[i] += dg_a.bias[i];

    grad_input += dg_a.input;
    return grad_input;
}

struct DownUnitTrace {
    Tensor4 input;
    Tensor4 pre;
    Tensor4 output;
};

inline Tensor4 down_unit_forward(const Tensor4& input, const DownUnitParams& p, DownUnitTrace* trace) {
    Tensor4 pre = conv2d(input, p.conv);
    Tensor4 out = prelu(pre, p.conv.slopes);
    if (trace) {
        trace->input = input;
        trace->pre = std::move(pre);
        trace->output = out;
    }
    return out;
}

inline Tensor4 downsample_unit(const Tensor4& input, const DownUnitParams& p) {
    return down_unit_forward(input, p, nullptr);
}

inline Tensor4 down_unit_backward(const Tensor4& grad_out, const DownUnitTrace& trace,
                                  const DownUnitParams& p, DownUnitParams& grads) {
    const PreluGrads pg = prelu_backward(grad_out, trace.pre, p.conv.slopes);
    for (std::size_t i = 0; i < pg.slopes.size(); ++i) grads.conv.slopes[i] += pg.slopes[i];
    const ConvGrads cg = conv2d_backward(pg.input, trace.input, p.conv);
    grads.conv.weights += cg.weights;
    for (std::size_t i = 0; i < cg.bias.size(); ++i) grads.conv.bias[i] += cg.bias[i];
    return cg.input;
}

struct ErbpnTrace {
    Tensor4 input;
    Tensor4 pre_init, f0;
    Tensor4 pre_pool;
    std::vector<Tensor4> lr_maps;  // L_0 .. (pool output then down outputs)
    std::vector<Tensor4> hr_maps;  // H_1 .. H_T
    std::vector<SffTrace> up_sff;
    std::vector<UpUnitTrace> up_units;
    std::vector<SffTrace> down_sff;
    std::vector<DownUnitTrace> down_units;
    SffTrace recon_sff;
    Tensor4 bicubic;  // per-sample upsampled input
};

// Network output before the [0,1] clip: predicted detail plus the bicubic
// upsample of the input. Input is a batch of single-channel LR planes.
inline Tensor4 erbpn_forward_raw(const Tensor4& input, const ErbpnModel& m,
                                 ErbpnTrace* trace = nullptr) {
    m.validate();
    if (input.c() != 1) throw ParameterError("erbpn_forward: single-channel input required");
    if (!input.all_finite()) throw NumericError("erbpn_forward: non-finite input");

    Tensor4 pre_init = conv2d(input, m.init_conv);
    Tensor4 f0 = prelu(pre_init, m.init_conv.slopes);
    Tensor4 pre_pool = conv2d(f0, m.pool_conv);
    Tensor4 pooled = prelu(pre_pool, m.pool_conv.slopes);

    std::vector<Tensor4> lr_maps{pooled};
    std::vector<Tensor4> hr_maps;
    if (trace) {
        trace->input = input;
        trace->pre_init = std::move(pre_init);
        trace->f0 = f0;
        trace->pre_pool = std::move(pre_pool);
        trace->up_sff.resize(m.unit_count);
        trace->up_units.resize(m.unit_count);
        trace->down_sff.resize(m.unit_count - 1);
        trace->down_units.resize(m.unit_count - 1);
    }

    for (int t = 0; t < m.unit_count; ++t) {
        Tensor4 fused = sff_forward(lr_maps, m.up_sff[t], trace ? &trace->up_sff[t] : nullptr);
        Tensor4 h = up_unit_forward(fused, m.up_units[t], trace ? &trace->up_units[t] : nullptr);
        hr_maps.push_back(std::move(h));
        if (t + 1 < m.unit_count) {
            Tensor4 hr_fused =
                sff_forward(hr_maps, m.down_sff[t], trace ? &trace->down_sff[t] : nullptr);
            lr_maps.push_back(
                down_unit_forward(hr_fused, m.down_units[t], trace ? &trace->down_units[t] : nullptr));
        }
    }

    Tensor4 recon = sff_forward(hr_maps, m.recon_sff, trace ? &trace->recon_sff : nullptr);
    Tensor4 out = conv2d(recon, m.recon_conv);

    // Global residual: add the bicubic upsample of each input plane.
    Tensor4 bicubic(out.n(), 1, out.h(), out.w());
    for (int n = 0; n < input.n(); ++n) {
        const ImagePlane up = resize_bicubic(to_image(input, n, 0), static_cast<double>(m.scale));
        if (up.height() != out.h() || up.width() != out.w())
            throw ParameterError("erbpn_forward: scale does not match projection geometry");
        for (int i = 0; i < out.h(); ++i)
            for (int j = 0; j < out.w(); ++j) bicubic.at(n, 0, i, j) = up.at(i, j);
    }
    out += bicubic;
    if (trace) {
        trace->lr_maps = std::move(lr_maps);
        trace->hr_maps = std::move(hr_maps);
        trace->bicubic = std::move(bicubic);
    }
    return out;
}

// Accumulates parameter gradients for a batch into `grads` (an ErbpnModel-
// shaped container, see zeros_like). Returns nothing for the input image:
// the network is trained on its parameters only.
inline void erbpn_backward(const Tensor4& grad_out, const ErbpnTrace& trace, const ErbpnModel& m,
                           ErbpnModel& grads) {
    // Reconstruction conv and fusion.
    const ConvGrads cg_rec = conv2d_backward(grad_out, trace.recon_sff.output, m.recon_conv);
    grads.recon_conv.weights += cg_rec.weights;
    for (std::size_t i = 0; i < cg_rec.bias.size(); ++i) grads.recon_conv.bias[i] += cg_rec.bias[i];

    std::vector<Tensor4> grad_hr(m.unit_count);
    {
        std::vector<Tensor4> gmaps;
        sff_backward(cg_rec.input, trace.recon_sff, m.recon_sff, grads.recon_sff, gmaps);
        for (int t = 0; t < m.unit_count; ++t) grad_hr[t] = std::move(gmaps[t]);
    }

    std::vector<Tensor4> grad_lr(m.unit_count);  // gradients for lr_maps[0..T-1]

    for (int t = m.unit_count - 1; t >= 0; --t) {
        if (t + 1 < m.unit_count) {
            // down unit t produced lr_maps[t+1]; all its consumers are done.
            Tensor4 grad_hr_fused =
                down_unit_backward(grad_lr[t + 1], trace.down_units[t], m.down_units[t],
                                   grads.down_units[t]);
            std::vector<Tensor4> gmaps;
            sff_backward(grad_hr_fused, trace.down_sff[t], m.down_sff[t], grads.down_sff[t], gmaps);
            for (int j = 0; j <= t; ++j) grad_hr[j] += gmaps[j];
        }
        Tensor4 grad_fused =
            up_unit_backward(grad_hr[t], trace.up_units[t], m.up_units[t], grads.up_units[t]);
        std::vector<Tensor4> gmaps;
        sff_backward(grad_fused, trace.up_sff[t], m.up_sff[t], grads.up_sff[t], gmaps);
        for (int j = 0; j <= t; ++j) {
            if (grad_lr[j].empty())
                grad_lr[j] = std::move(gmaps[j]);
            else
                grad_lr[j] += gmaps[j];
        }
    }

    // Shallow feature path.
    const PreluGrads pg_pool = prelu_backward(grad_lr[0], trace.pre_pool, m.pool_conv.slopes);
    for (std::size_t i = 0; i < pg_pool.slopes.size(); ++i)
        grads.pool_conv.slopes[i] += pg_pool.slopes[i];
    const ConvGrads cg_pool = conv2d_backward(pg_pool.input, trace.f0, m.pool_conv);
    grads.pool_conv.weights += cg_pool.weights;
    for (std::size_t i = 0; i < cg_pool.bias.size(); ++i) grads.pool_conv.bias[i] += cg_pool.bias[i];

    const PreluGrads pg_init = prelu_backward(cg_pool.input, trace.pre_init, m.init_conv.slopes);
    for (std::size_t i = 0; i < pg_init.slopes.size(); ++i)
        grads.init_conv.slopes[i] += pg_init.slopes[i];
    const ConvGrads cg_init = conv2d_backward(pg_init.input, trace.input, m.init_conv);
    grads.init_conv.weights += cg_init.weights;
    for (std::size_t i = 0; i < cg_init.bias.size(); ++i) grads.init_conv.bias[i] += cg_init.bias[i];
}

// Inference entry point for a single LR plane; output clipped to [0,1].
inline ImagePlane erbpn_forward(const ImagePlane& lr, const ErbpnModel& m) {
    if (!lr.all_finite()) throw NumericError("erbpn_forward: non-finite input");
    const Tensor4 out = erbpn_forward_raw(to_tensor(lr), m);
    return clip01(to_image(out));
}

// --- serialization ----------------------------------------------------------
//
// Flat binary format: magic "ERBW", u32 version, architecture header
// (scale, T, n_f, n_0), a layer table, then raw little-endian doubles per
// layer in declaration order.

namespace erbpn_io {

constexpr char kMagic[4] = {'E', 'R', 'B', 'W'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void write_pod(std::ostream& out, const T& v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <typename T>
void read_pod(std::istream& in, T& v) {
    in.read(reinterpret_cast<char*>(&v), sizeof v);
}

}  // namespace erbpn_io

inline void save_model(const std::string& path, const ErbpnModel& m) {
    m.validate();
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write model " + path);
    out.write(erbpn_io::kMagic, 4);
    erbpn_io::write_pod(out, erbpn_io::kVersion);
    erbpn_io::write_pod(out, static_cast<std::int32_t>(m.scale));
    erbpn_io::write_pod(out, static_cast<std::int32_t>(m.unit_count));
    erbpn_io::write_pod(out, static_cast<std::int32_t>(m.n_features));
    erbpn_io::write_pod(out, static_cast<std::int32_t>(m.n_shallow));

    std::uint32_t layer_count = 0;
    for_each_layer(m, [&](const LayerParams&) { ++layer_count; });
    erbpn_io::write_pod(out, layer_count);

    for_each_layer(m, [&](const LayerParams& p) {
        const std::int32_t dims[8] = {p.weights.n(), p.weights.c(), p.weights.h(), p.weights.w(),
                                      p.stride,      p.padding,     static_cast<std::int32_t>(p.bias.size()),
                                      static_cast<std::int32_t>(p.slopes.size())};
        out.write(reinterpret_cast<const char*>(dims), sizeof dims);
        out.write(reinterpret_cast<const char*>(p.weights.data().data()),
                  static_cast<std::streamsize>(p.weights.size() * sizeof(double)));
        out.write(reinterpret_cast<const char*>(p.bias.data()),
                  static_cast<std::streamsize>(p.bias.size() * sizeof(double)));
        out.write(reinterpret_cast<const char*>(p.slopes.data()),
                  static_cast<std::streamsize>(p.slopes.size() * sizeof(double)));
    });
    if (!out) throw IoError("failed writing model " + path);
}

inline ErbpnModel load_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open model " + path);
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, erbpn_io::kMagic, 4) != 0)
        throw IoError("not a model file: " + path);
    std::uint32_t version = 0;
    erbpn_io::read_pod(in, version);
    if (version != erbpn_io::kVersion) throw IoError("unsupported model version in " + path);

    std::int32_t scale = 0, unit_count = 0, n_features = 0, n_shallow = 0;
    erbpn_io::read_pod(in, scale);
    erbpn_io::read_pod(in, unit_count);
    erbpn_io::read_pod(in, n_features);
    erbpn_io::read_pod(in, n_shallow);

    // Rebuild the architecture, then overwrite every layer from the stream.
    ErbpnModel m = make_erbpn_model(scale, unit_count, n_features, n_shallow, /*seed=*/0);
    std::uint32_t layer_count = 0;
    erbpn_io::read_pod(in, layer_count);
    std::uint32_t expected = 0;
    for_each_layer(m, [&](const LayerParams&) { ++expected; });
    if (layer_count != expected) throw IoError("model layer table mismatch in " + path);

    for_each_layer(m, [&](LayerParams& p) {
        std::int32_t dims[8];
        in.read(reinterpret_cast<char*>(dims), sizeof dims);
        if (dims[0] != p.weights.n() || dims[1] != p.weights.c() || dims[2] != p.weights.h() ||
            dims[3] != p.weights.w() || dims[4] != p.stride || dims[5] != p.padding ||
            dims[6] != static_cast<std::int32_t>(p.bias.size()) ||
            dims[7] != static_cast<std::int32_t>(p.slopes.size()))
            throw IoError("model layer geometry mismatch in " + path);
        in.read(reinterpret_cast<char*>(p.weights.data().data()),
                static_cast<std::streamsize>(p.weights.size() * sizeof(double)));
        in.read(reinterpret_cast<char*>(p.bias.data()),
                static_cast<std::streamsize>(p.bias.size() * sizeof(double)));
        in.read(reinterpret_cast<char*>(p.slopes.data()),
                static_cast<std::streamsize>(p.slopes.size() * sizeof(double)));
    });
    if (!in) throw IoError("truncated model file " + path);
    return m;
}

}  // namespace cascsr
