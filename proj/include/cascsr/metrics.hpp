#pragma once

#include <atomic>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "cascsr/cascade.hpp"
#include "cascsr/degradation.hpp"
#include "cascsr/errors.hpp"
#include "cascsr/image.hpp"
#include "cascsr/lorig.hpp"
#include "cascsr/registration.hpp"

namespace cascsr {

// Full-reference quality metrics and the benchmark harness that sweeps the
// simulation protocol over images, methods and noise levels.

inline double psnr(const ImagePlane& reference, const ImagePlane& test, double peak = 1.0) {
    if (!reference.same_shape(test)) throw ParameterError("psnr: shape mismatch");
    if (!(peak > 0.0)) throw ParameterError("psnr: peak must be positive");
    double mse = 0.0;
    for (std::size_t i = 0; i < reference.size(); ++i) {
        const double d = reference.data()[i] - test.data()[i];
        mse += d * d;
    }
    mse /= static_cast<double>(reference.size());
    if (mse == 0.0) return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(peak * peak / mse);
}

// Mean local SSIM, 11x11 Gaussian window sigma=1.5, K1=0.01, K2=0.03,
// dynamic range 1. Windows are evaluated on the valid region only.
inline double ssim(const ImagePlane& reference, const ImagePlane& test) {
    if (!reference.same_shape(test)) throw ParameterError("ssim: shape mismatch");
    constexpr int kRadius = 5;
    constexpr double kC1 = 0.01 * 0.01;
    constexpr double kC2 = 0.03 * 0.03;
    const int h = reference.height(), w = reference.width();
    if (h < 2 * kRadius + 1 || w < 2 * kRadius + 1)
        throw ParameterError("ssim: image smaller than the 11x11 window");

    // Normalized Gaussian window, built once.
    static const std::vector<double> window = [] {
        const Kernel2D k = gaussian_kernel(1.5, kRadius);
        return k.weights();
    }();
    const int side = 2 * kRadius + 1;

    double total = 0.0;
    long count = 0;
    for (int i = kRadius; i < h - kRadius; ++i) {
        for (int j = kRadius; j < w - kRadius; ++j) {
            double mx = 0.0, my = 0.0, mxx = 0.0, myy = 0.0, mxy = 0.0;
            for (int a = -kRadius; a <= kRadius; ++a) {
                for (int b = -kRadius; b <= kRadius; ++b) {
                    const double wgt = window[static_cast<std::size_t>(a + kRadius) * side + (b + kRadius)];
                    const double x = reference.at(i + a, j + b);
                    const double y = test.at(i + a, j + b);
                    mx += wgt * x;
                    my += wgt * y;
                    mxx += wgt * x * x;
                    myy += wgt * y * y;
                    mxy += wgt * x * y;
                }
            }
            const double vx = mxx - mx * mx;
            const double vy = myy - my * my;
            const double cov = mxy - mx * my;
            const double num = (2.0 * mx * my + kC1) * (2.0 * cov + kC2);
            const double den = (mx * mx + my * my + kC1) * (vx + vy + kC2);
            total += num / den;
            ++count;
        }
    }
    return total / static_cast<double>(count);
}

// --- benchmark harness ------------------------------------------------------

struct MetricsRow {
    std::string image;
    std::string method;
    int scale = 0;
    double noise_variance = 0.0;
    double psnr_db = 0.0;
    double ssim_value = 0.0;
};

struct MetricsReport {
    std::vector<std::string> metadata;  // emitted as leading '#' lines
    std::vector<MetricsRow> rows;

    std::string to_csv() const {
        std::ostringstream os;
        os.precision(17);
        for (const auto& m : metadata) os << "# " << m << "\n";
        os << "image,method,scale,noise_variance,psnr_db,ssim\n";
        for (const auto& r : rows) {
            os << r.image << "," << r.method << "," << r.scale << "," << r.noise_variance << ",";
            if (std::isinf(r.psnr_db))
                os << "inf";
            else
                os << r.psnr_db;
            os << "," << r.ssim_value << "\n";
        }
        return os.str();
    }

    void save(const std::string& path) const {
        std::ofstream out(path, std::ios::binary);
        if (!out) throw IoError("cannot write " + path);
        out << to_csv();
    }
};

struct BenchmarkImage {
    std::string id;
    ImagePlane hr;  // luminance; color inputs are reduced before benchmarking
};

struct BenchmarkProtocol {
    int scale = 4;
    int frame_count = 16;
    double blur_sigma = 1.5;
    int blur_radius = 4;
    std::vector<double> noise_variances{0.0};
    std::uint64_t seed = 0;
    ShiftMode shift_mode = ShiftMode::Grid;
    RegistrationMode registration = RegistrationMode::GroundTruth;
    LorigConfig lorig_cfg;
    const ErbpnModel* cascade_model = nullptr;  // stage-2 model for mfsf / stage-1 for sfmf
    const ErbpnModel* direct_model = nullptr;   // full-scale model for the erbpn method
    int threads = 1;
};

namespace bench_detail {

inline MetricsRow score(const std::string& image_id, const std::string& method,
                        const BenchmarkProtocol& p, double noise, const ImagePlane& hr,
                        const ImagePlane& result) {
    MetricsRow row;
    row.image = image_id;
    row.method = method;
    row.scale = p.scale;
    row.noise_variance = noise;
    row.psnr_db = psnr(hr, result);
    row.ssim_value = ssim(hr, result);
    return row;
}

inline ImagePlane run_method(const std::string& method, const FrameSequence& seq,
                             const BenchmarkProtocol& p) {
    if (method == "bicubic")
        return clip01(resize_bicubic(seq.reference(), static_cast<double>(p.scale)));
    if (method == "lorig") return lorig_reconstruct(seq, p.lorig_cfg, p.scale);
    if (method == "erbpn") {
        if (!p.direct_model) throw ParameterError("benchmark: erbpn method needs a direct model");
        return erbpn_forward(seq.reference(), *p.direct_model);
    }
    if (method == "mfsf" || method == "sfmf") {
        if (!p.cascade_model) throw ParameterError("benchmark: cascade methods need a model");
        CascadePlan plan;
        plan.lorig_cfg = p.lorig_cfg;
        plan.model = p.cascade_model;
        if (method == "mfsf") {
            plan.order = CascadeOrder::Mfsf;
            plan.stage1_scale = p.scale / p.cascade_model->scale;
            plan.stage2_scale = p.cascade_model->scale;
            return mfsf_sr(seq, plan);
        }
        plan.order = CascadeOrder::Sfmf;
        plan.stage1_scale = p.cascade_model->scale;
        plan.stage2_scale = p.scale / p.cascade_model->scale;
        return sfmf_sr(seq, plan);
    }
    throw ParameterError("benchmark: unknown method '" + method + "'");
}

}  // namespace bench_detail

// Runs every (image, noise level) cell: simulate, register, reconstruct with
// each method, score against the ground truth. Cells are independent and may
// run on several threads; output order and content do not depend on the
// thread count because each cell derives its own RNG stream.
inline MetricsReport benchmark(const std::vector<BenchmarkImage>& images,
                               const std::vector<std::string>& methods,
                               const BenchmarkProtocol& protocol) {
    for (const auto& img : images) {
        if (img.hr.height() % protocol.scale != 0 || img.hr.width() % protocol.scale != 0)
            throw ParameterError("benchmark: image '" + img.id + "' not divisible by scale");
        if (!img.hr.all_finite()) throw NumericError("benchmark: non-finite image " + img.id);
    }

    struct Cell {
        std::size_t image_idx;
        std::size_t noise_idx;
    };
    std::vector<Cell> cells;
    for (std::size_t i = 0; i < images.size(); ++i)
        for (std::size_t v = 0; v < protocol.noise_variances.size(); ++v) cells.push_back({i, v});

    std::vector<std::vector<MetricsRow>> cell_rows(cells.size());
    std::atomic<std::size_t> next{0};

    auto worker = [&]() {
        for (;;) {
            const std::size_t c = next.fetch_add(1);
            if (c >= cells.size()) return;
            const auto& img = images[cells[c].image_idx];
            const double noise = protocol.noise_variances[cells[c].noise_idx];

            DegradationSpec spec = make_gaussian_spec(
                protocol.scale, protocol.blur_sigma, protocol.blur_radius, noise,
                Rng::substream(protocol.seed, c).next_u64());
            FrameSequence seq = simulate_sequence(img.hr, spec, protocol.frame_count,
                                                  protocol.shift_mode);
            seq = register_sequence(seq, protocol.registration);

            for (const auto& method : methods) {
                const ImagePlane result = bench_detail::run_method(method, seq, protocol);
                cell_rows[c].push_back(bench_detail::score(img.id, method, protocol, noise, img.hr, result));
            }
        }
    };

    const int thread_count = std::max(1, protocol.threads);
    if (thread_count == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < thread_count; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }

    MetricsReport report;
    {
        std::ostringstream meta;
        meta << "scale=" << protocol.scale << " frames=" << protocol.frame_count
             << " blur_sigma=" << protocol.blur_sigma << " seed=" << protocol.seed;
        report.metadata.push_back(meta.str());
    }
    // Deterministic row order: image, then method, then noise level.
    for (std::size_t i = 0; i < images.size(); ++i)
        for (const auto& method : methods)
            for (std::size_t v = 0; v < protocol.noise_variances.size(); ++v) {
                const std::size_t c = i * protocol.noise_variances.size() + v;
                for (const auto& row : cell_rows[c])
                    if (row.method == method) report.rows.push_back(row);
            }
    return report;
}

}  // namespace cascsr
