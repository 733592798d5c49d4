#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

#include "cascsr/config.hpp"
#include "cascsr/errors.hpp"
#include "cascsr/image.hpp"
#include "cascsr/image_io.hpp"
#include "cascsr/rng.hpp"

namespace cascsr {

// Per-frame translational motion, expressed in pixels of the grid the warp
// acts on (HR pixels for observation sequences).
struct Motion {
    double dx = 0.0;
    double dy = 0.0;
};

// Shared degradation parameters: decimation factor s, blur kernel B, and the
// white-Gaussian noise variance on the [0,1] intensity scale.
struct DegradationSpec {
    int scale = 4;
    Kernel2D blur = Kernel2D::delta();
    double noise_variance = 0.0;
    std::uint64_t rng_seed = 0;
    double blur_sigma = 0.0;  // recorded for the manifest; 0 when kernel is custom

    void validate() const {
        if (scale < 1) throw ParameterError("DegradationSpec: scale must be >= 1");
        if (noise_variance < 0.0) throw ParameterError("DegradationSpec: negative noise variance");
    }
};

inline DegradationSpec make_gaussian_spec(int scale, double sigma, int radius, double noise_variance,
                                          std::uint64_t seed) {
    DegradationSpec spec;
    spec.scale = scale;
    spec.blur = gaussian_kernel(sigma, radius);
    spec.noise_variance = noise_variance;
    spec.rng_seed = seed;
    spec.blur_sigma = sigma;
    spec.validate();
    return spec;
}

// K observed LR frames with their motions and the shared degradation spec.
struct FrameSequence {
    std::vector<ImagePlane> frames;
    std::vector<Motion> motions;  // HR-pixel shifts applied before blur/decimation
    DegradationSpec spec;
    int reference_index = 0;

    int count() const { return static_cast<int>(frames.size()); }

    void validate() const {
        if (frames.empty()) throw ParameterError("FrameSequence: empty");
        if (frames.size() != motions.size())
            throw ParameterError("FrameSequence: frame/motion count mismatch");
        for (const auto& f : frames)
            if (!f.same_shape(frames.front()))
                throw ParameterError("FrameSequence: frames differ in shape");
        if (reference_index < 0 || reference_index >= count())
            throw ParameterError("FrameSequence: reference index out of range");
        spec.validate();
    }

    const ImagePlane& reference() const { return frames[reference_index]; }
};

// W_k z = D B M_k z: warp by the frame motion, blur, decimate.
inline ImagePlane apply_W(const ImagePlane& z, const Motion& motion, const DegradationSpec& spec) {
    return decimate(convolve_circular(shift_subpixel(z, motion.dx, motion.dy), spec.blur), spec.scale);
}

// W_k^T g = M_k^T B^T D^T g: zero-insert, correlate, scatter-warp.
inline ImagePlane apply_W_adjoint(const ImagePlane& g, const Motion& motion,
                                  const DegradationSpec& spec) {
    return shift_subpixel_adjoint(correlate_circular(upsample_zero(g, spec.scale), spec.blur),
                                  motion.dx, motion.dy);
}

// Adds i.i.d. zero-mean Gaussian noise with the given variance; the seed fully
// determines the sample.
inline ImagePlane add_awgn(const ImagePlane& img, double variance, std::uint64_t seed) {
    if (variance < 0.0) throw ParameterError("add_awgn: negative variance");
    ImagePlane out = img;
    if (variance == 0.0) return out;
    Rng rng(seed);
    const double stddev = std::sqrt(variance);
    for (double& v : out.data()) v += stddev * rng.normal();
    return out;
}

enum class ShiftMode { Grid, Random };

// Grid schedule: side = ceil(sqrt(count)) positions per axis, spaced s/side HR
// pixels apart, so the shifts tile the LR pixel footprint evenly. For the
// reference protocol (count=16, s=4) this is the integer lattice {0..3}^2.
inline std::vector<Motion> grid_shifts(int count, int scale) {
    const int side = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(count))));
    const double step = static_cast<double>(scale) / side;
    std::vector<Motion> shifts(count);
    for (int k = 0; k < count; ++k)
        shifts[k] = Motion{step * (k % side), step * (k / side)};
    return shifts;
}

inline std::vector<Motion> random_shifts(int count, int scale, std::uint64_t seed) {
    Rng rng = Rng::substream(seed, 0x5154);
    std::vector<Motion> shifts(count);
    for (int k = 0; k < count; ++k)
        shifts[k] = Motion{rng.uniform(0.0, static_cast<double>(scale)),
                           rng.uniform(0.0, static_cast<double>(scale))};
    return shifts;
}

// Synthesizes the LR sequence: frame k = W_k(hr) + AWGN. Noise streams are
// derived per frame from (seed, k), so generation order never matters.
inline FrameSequence simulate_sequence(const ImagePlane& hr, const DegradationSpec& spec, int count,
                                       ShiftMode mode) {
    spec.validate();
    if (count < 1) throw ParameterError("simulate_sequence: count must be >= 1");
    if (hr.height() % spec.scale != 0 || hr.width() % spec.scale != 0)
        throw ParameterError("simulate_sequence: HR dimensions not divisible by scale");

    FrameSequence seq;
    seq.spec = spec;
    seq.motions = mode == ShiftMode::Grid ? grid_shifts(count, spec.scale)
                                          : random_shifts(count, spec.scale, spec.rng_seed);
    seq.frames.reserve(count);
    for (int k = 0; k < count; ++k) {
        ImagePlane lr = apply_W(hr, seq.motions[k], spec);
        if (spec.noise_variance > 0.0) {
            Rng rng = Rng::substream(spec.rng_seed, static_cast<std::uint64_t>(k));
            const double stddev = std::sqrt(spec.noise_variance);
            for (double& v : lr.data()) v += stddev * rng.normal();
        }
        seq.frames.push_back(std::move(lr));
    }
    seq.reference_index = count / 2;
    seq.validate();
    return seq;
}

// --- sequence persistence -------------------------------------------------
//
// A sequence directory holds numbered frames plus manifest.txt with the
// degradation parameters, per-frame motions and the reference index.

inline std::string frame_filename(int index) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "frame_%03d.png", index);
    return buf;
}

inline void save_sequence(const std::string& dir, const FrameSequence& seq) {
    seq.validate();
    namespace fs = std::filesystem;
    fs::create_directories(dir);

    KeyValueConfig manifest;
    manifest.set("scale", static_cast<long long>(seq.spec.scale));
    manifest.set("blur_sigma", seq.spec.blur_sigma);
    manifest.set("blur_radius", static_cast<long long>(seq.spec.blur.radius()));
    manifest.set("noise_variance", seq.spec.noise_variance);
    manifest.set("seed", static_cast<long long>(seq.spec.rng_seed));
    manifest.set("reference_index", static_cast<long long>(seq.reference_index));
    manifest.set("frames", static_cast<long long>(seq.count()));
    for (int k = 0; k < seq.count(); ++k) {
        std::ostringstream motion;
        motion.precision(17);
        motion << seq.motions[k].dx << " " << seq.motions[k].dy;
        manifest.set("motion_" + std::to_string(k), motion.str());
        save_image_gray((fs::path(dir) / frame_filename(k)).string(), seq.frames[k]);
    }
    manifest.save((fs::path(dir) / "manifest.txt").string());
}

inline FrameSequence load_sequence(const std::string& dir) {
    namespace fs = std::filesystem;
    const KeyValueConfig manifest = KeyValueConfig::from_file((fs::path(dir) / "manifest.txt").string());

    FrameSequence seq;
    const double sigma = manifest.get_double("blur_sigma");
    const int radius = static_cast<int>(manifest.get_int("blur_radius"));
    seq.spec.scale = static_cast<int>(manifest.get_int("scale"));
    seq.spec.blur = sigma > 0.0 ? gaussian_kernel(sigma, radius) : Kernel2D::delta();
    seq.spec.blur_sigma = sigma;
    seq.spec.noise_variance = manifest.get_double("noise_variance");
    seq.spec.rng_seed = static_cast<std::uint64_t>(manifest.get_int("seed"));
    seq.reference_index = static_cast<int>(manifest.get_int("reference_index"));

    const int count = static_cast<int>(manifest.get_int("frames"));
    for (int k = 0; k < count; ++k) {
        std::istringstream is(manifest.get_string("motion_" + std::to_string(k)));
        Motion m;
        if (!(is >> m.dx >> m.dy))
            throw IoError("manifest: malformed motion entry " + std::to_string(k));
        seq.motions.push_back(m);
        seq.frames.push_back(load_image_gray((fs::path(dir) / frame_filename(k)).string()));
    }
    seq.validate();
    return seq;
}

}  // namespace cascsr
