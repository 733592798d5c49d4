#pragma once

#include <cmath>
#include <vector>

#include "cascsr/degradation.hpp"
#include "cascsr/errors.hpp"
#include "cascsr/image.hpp"

namespace cascsr {

// Translational motion estimation by circular cross-correlation with a
// subpixel quadratic peak fit. Stands in for dense optical flow: the
// sequences this toolkit handles are pure subpixel translations.

namespace reg_detail {

inline ImagePlane remove_mean(const ImagePlane& img) {
    double mean = 0.0;
    for (double v : img.data()) mean += v;
    mean /= static_cast<double>(img.size());
    ImagePlane out = img;
    for (double& v : out.data()) v -= mean;
    return out;
}

// Parabola vertex through (-1,cm), (0,c0), (+1,cp). Fitted on log values
// when the samples allow it: exact for Gaussian-shaped peaks, much smaller
// bias on real correlation surfaces. Zero when degenerate.
inline double quadratic_peak_offset(double cm, double c0, double cp) {
    if (cm > 0.0 && c0 > 0.0 && cp > 0.0) {
        cm = std::log(cm);
        c0 = std::log(c0);
        cp = std::log(cp);
    }
    const double denom = cm - 2.0 * c0 + cp;
    if (denom >= 0.0) return 0.0;  // not a strict local max
    double delta = (cm - cp) / (2.0 * denom);
    if (delta > 0.5) delta = 0.5;
    if (delta < -0.5) delta = -0.5;
    return delta;
}

}  // namespace reg_detail

// Returns (dx, dy) such that target ~= shift_subpixel(reference, dx, dy),
// in pixels of the input grid, wrapped into [-W/2, W/2) x [-H/2, H/2).
inline Motion estimate_shift(const ImagePlane& reference, const ImagePlane& target) {
    if (!reference.same_shape(target)) throw ParameterError("estimate_shift: shape mismatch");
    const int h = reference.height(), w = reference.width();

    const ImagePlane ref = reg_detail::remove_mean(reference);
    const ImagePlane tgt = reg_detail::remove_mean(target);
    double ref_energy = 0.0, tgt_energy = 0.0;
    for (double v : ref.data()) ref_energy += v * v;
    for (double v : tgt.data()) tgt_energy += v * v;
    if (ref_energy <= 0.0 || tgt_energy <= 0.0)
        throw DegenerateInputError("estimate_shift: flat image has no correlation peak");

    // c(u, v) = <tgt, roll(ref by (v, u))>: peak at the applied shift.
    ImagePlane corr(h, w);
    for (int u = 0; u < h; ++u) {
        for (int v = 0; v < w; ++v) {
            double acc = 0.0;
            for (int i = 0; i < h; ++i)
                for (int j = 0; j < w; ++j)
                    acc += tgt.at(i, j) * ref.wrap(i - u, j - v);
            corr.at(u, v) = acc;
        }
    }

    int best_u = 0, best_v = 0;
    double best = corr.at(0, 0);
    for (int u = 0; u < h; ++u) {
        for (int v = 0; v < w; ++v) {
            if (corr.at(u, v) > best) {
                best = corr.at(u, v);
                best_u = u;
                best_v = v;
            }
        }
    }

    const double du = reg_detail::quadratic_peak_offset(corr.wrap(best_u - 1, best_v),
                                                        corr.at(best_u, best_v),
                                                        corr.wrap(best_u + 1, best_v));
    const double dv = reg_detail::quadratic_peak_offset(corr.wrap(best_u, best_v - 1),
                                                        corr.at(best_u, best_v),
                                                        corr.wrap(best_u, best_v + 1));

    double dy = best_u + du;
    double dx = best_v + dv;
    if (dy >= h / 2.0) dy -= h;
    if (dx >= w / 2.0) dx -= w;
    return Motion{dx, dy};
}

enum class RegistrationMode { Estimate, GroundTruth };

// Fills per-frame motions. Ground-truth mode keeps the simulator motions;
// estimate mode correlates each frame against the reference, which makes the
// motions relative to the reference frame's own (unknown) shift.
inline FrameSequence register_sequence(const FrameSequence& seq, RegistrationMode mode) {
    seq.validate();
    if (mode == RegistrationMode::GroundTruth) return seq;

    FrameSequence out = seq;
    const ImagePlane& ref = seq.reference();
    for (int k = 0; k < seq.count(); ++k) {
        if (k == seq.reference_index) {
            out.motions[k] = Motion{0.0, 0.0};
            continue;
        }
        const Motion lr = estimate_shift(ref, seq.frames[k]);
        out.motions[k] = Motion{lr.dx * seq.spec.scale, lr.dy * seq.spec.scale};
    }
    return out;
}

}  // namespace cascsr
