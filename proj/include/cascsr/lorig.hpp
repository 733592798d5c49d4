#pragma once

#include <cmath>
#include <fstream>
#include <functional>
#include <string>
#include <vector>

#include "cascsr/degradation.hpp"
#include "cascsr/errors.hpp"
#include "cascsr/image.hpp"

namespace cascsr {

// Multi-frame variational reconstruction with an L0 intensity+gradient prior:
//
//   min_z  sum_k ||g_k - W_k z||^2 + (beta/2)||z - u||^2
//        + (mu/2)||grad z - v||^2 + lambda (||u||_0 + ||v||_0)
//
// solved by alternating hard-threshold updates for the auxiliaries u, v and a
// preconditioned conjugate-gradient solve for z, with beta and mu decaying
// each outer sweep.

enum class GradientThresholdMode { Joint, PerComponent };

struct LorigConfig {
    double lambda = 1e-3;        // L0 weight
    double beta0 = 1e-3;         // initial intensity-split penalty
    double mu0 = 1e-3;           // initial gradient-split penalty
    double penalty_decay = 0.9;  // multiplier per outer iteration; >1 gives a
                                 // growing schedule for experimentation
    int max_outer = 30;
    int cg_max_iters = 30;
    double cg_tolerance = 1e-6;  // relative residual
    GradientThresholdMode gradient_threshold_mode = GradientThresholdMode::Joint;

    void validate() const {
        if (lambda < 0.0) throw ParameterError("LorigConfig: lambda must be >= 0");
        if (beta0 <= 0.0 || mu0 <= 0.0) throw ParameterError("LorigConfig: penalties must be positive");
        if (penalty_decay <= 0.0) throw ParameterError("LorigConfig: penalty_decay must be positive");
        if (max_outer < 1 || cg_max_iters < 1) throw ParameterError("LorigConfig: iteration counts must be >= 1");
        if (cg_tolerance <= 0.0) throw ParameterError("LorigConfig: cg_tolerance must be positive");
    }

    static LorigConfig from_config(const KeyValueConfig& kv) {
        LorigConfig cfg;
        cfg.lambda = kv.get_double("lambda", cfg.lambda);
        cfg.beta0 = kv.get_double("beta0", cfg.beta0);
        cfg.mu0 = kv.get_double("mu0", cfg.mu0);
        cfg.penalty_decay = kv.get_double("penalty_decay", cfg.penalty_decay);
        cfg.max_outer = static_cast<int>(kv.get_int("max_outer", cfg.max_outer));
        cfg.cg_max_iters = static_cast<int>(kv.get_int("cg_max_iters", cfg.cg_max_iters));
        cfg.cg_tolerance = kv.get_double("cg_tolerance", cfg.cg_tolerance);
        const std::string mode = kv.get_string("gradient_threshold_mode", "joint");
        if (mode == "joint")
            cfg.gradient_threshold_mode = GradientThresholdMode::Joint;
        else if (mode == "per_component")
            cfg.gradient_threshold_mode = GradientThresholdMode::PerComponent;
        else
            throw ParameterError("LorigConfig: unknown gradient_threshold_mode '" + mode + "'");
        cfg.validate();
        return cfg;
    }
};

struct LorigState {
    ImagePlane z;
    ImagePlane u;
    GradientPair v;
    double beta = 0.0;
    double mu = 0.0;
    int iteration = 0;
};

// Per-pixel minimizer of (beta/2)(z_i - u_i)^2 + lambda*[u_i != 0]:
// keep z_i when z_i^2 > 2*lambda/beta, else 0. Equality goes to 0.
inline ImagePlane solve_u(const ImagePlane& z, double lambda, double beta) {
    if (beta <= 0.0) throw ParameterError("solve_u: beta must be positive");
    const double threshold = 2.0 * lambda / beta;
    ImagePlane u(z.height(), z.width());
    for (std::size_t i = 0; i < z.size(); ++i) {
        const double zi = z.data()[i];
        u.data()[i] = zi * zi > threshold ? zi : 0.0;
    }
    return u;
}

// Hard threshold on the gradient pair. Joint mode keeps or zeroes the pixel's
// (gx, gy) vector by its squared magnitude; per-component mode thresholds the
// channels independently.
inline GradientPair solve_v(const GradientPair& g, double lambda, double mu,
                            GradientThresholdMode mode) {
    if (mu <= 0.0) throw ParameterError("solve_v: mu must be positive");
    if (!g.gx.same_shape(g.gy)) throw ParameterError("solve_v: channel shape mismatch");
    const double threshold = 2.0 * lambda / mu;
    GradientPair v{ImagePlane(g.gx.height(), g.gx.width()), ImagePlane(g.gx.height(), g.gx.width())};
    for (std::size_t i = 0; i < g.gx.size(); ++i) {
        const double gx = g.gx.data()[i];
        const double gy = g.gy.data()[i];
        if (mode == GradientThresholdMode::Joint) {
            const bool keep = gx * gx + gy * gy > threshold;
            v.gx.data()[i] = keep ? gx : 0.0;
            v.gy.data()[i] = keep ? gy : 0.0;
        } else {
            v.gx.data()[i] = gx * gx > threshold ? gx : 0.0;
            v.gy.data()[i] = gy * gy > threshold ? gy : 0.0;
        }
    }
    return v;
}

namespace lorig_detail {

// Normal operator A z = 2 sum_k W_k^T W_k z + beta z + mu grad^T grad z.
inline ImagePlane apply_normal_operator(const FrameSequence& seq, const ImagePlane& z, double beta,
                                        double mu) {
    ImagePlane out(z.height(), z.width());
    for (int k = 0; k < seq.count(); ++k) {
        const ImagePlane wtw = apply_W_adjoint(apply_W(z, seq.motions[k], seq.spec),
                                               seq.motions[k], seq.spec);
        for (std::size_t i = 0; i < out.size(); ++i) out.data()[i] += 2.0 * wtw.data()[i];
    }
    if (beta != 0.0)
        for (std::size_t i = 0; i < out.size(); ++i) out.data()[i] += beta * z.data()[i];
    if (mu != 0.0) {
        const ImagePlane lap = gradient_adjoint(gradient_forward(z));
        for (std::size_t i = 0; i < out.size(); ++i) out.data()[i] += mu * lap.data()[i];
    }
    return out;
}

// diag(2 sum_k W_k^T W_k): periodic with period s in each axis because the
// circular blur/warp commute with integer shifts and D^T D selects one phase.
// s^2 indicator probes recover it exactly.
inline ImagePlane data_term_diagonal(const FrameSequence& seq, int hr_height, int hr_width) {
    const int s = seq.spec.scale;
    ImagePlane diag(hr_height, hr_width);
    for (int pi = 0; pi < s; ++pi) {
        for (int pj = 0; pj < s; ++pj) {
            ImagePlane probe(hr_height, hr_width);
            probe.at(pi, pj) = 1.0;
            double value = 0.0;
            for (int k = 0; k < seq.count(); ++k) {
                const ImagePlane col = apply_W_adjoint(apply_W(probe, seq.motions[k], seq.spec),
                                                       seq.motions[k], seq.spec);
                value += 2.0 * col.at(pi, pj);
            }
            for (int i = pi; i < hr_height; i += s)
                for (int j = pj; j < hr_width; j += s) diag.at(i, j) = value;
        }
    }
    return diag;
}

}  // namespace lorig_detail

struct CgReport {
    int iterations = 0;
    double final_relative_residual = 0.0;
    std::vector<double> residual_norms;  // preconditioned norm after 0..iterations steps
};

// Jacobi-preconditioned conjugate-direction solve of the z-subproblem
// normal equations
//   (2 sum_k W_k^T W_k + beta I + mu grad^T grad) z
//       = 2 sum_k W_k^T g_k + beta u + mu grad^T v
// warm-started from the supplied z. The iteration is the conjugate-residual
// variant: it minimizes the preconditioned residual norm over the growing
// Krylov space, so the reported residual history is non-increasing (plain
// conjugate gradients only guarantees that for the error norm, not the
// residual). Residuals are measured and the stop test applied in the
// M^-1 inner product, M the Jacobi diagonal.
inline ImagePlane solve_z_cg(const FrameSequence& seq, const ImagePlane& u, const GradientPair& v,
                             double beta, double mu, int cg_max_iters, double cg_tolerance,
                             const ImagePlane& warm_start, CgReport* report = nullptr) {
    seq.validate();
    const int hr_h = seq.frames.front().height() * seq.spec.scale;
    const int hr_w = seq.frames.front().width() * seq.spec.scale;
    if (u.height() != hr_h || u.width() != hr_w)
        throw ParameterError("solve_z_cg: u dimensions do not match scale");
    if (warm_start.height() != hr_h || warm_start.width() != hr_w)
        throw ParameterError("solve_z_cg: warm start dimensions do not match scale");
    if (!u.all_finite() || !warm_start.all_finite() || !v.gx.all_finite() || !v.gy.all_finite())
        throw NumericError("solve_z_cg: non-finite input");
    for (const auto& f : seq.frames)
        if (!f.all_finite()) throw NumericError("solve_z_cg: non-finite frame");

    // Right-hand side.
    ImagePlane b(hr_h, hr_w);
    for (int k = 0; k < seq.count(); ++k) {
        const ImagePlane wtg = apply_W_adjoint(seq.frames[k], seq.motions[k], seq.spec);
        for (std::size_t i = 0; i < b.size(); ++i) b.data()[i] += 2.0 * wtg.data()[i];
    }
    if (beta != 0.0)
        for (std::size_t i = 0; i < b.size(); ++i) b.data()[i] += beta * u.data()[i];
    if (mu != 0.0) {
        const ImagePlane gtv = gradient_adjoint(v);
        for (std::size_t i = 0; i < b.size(); ++i) b.data()[i] += mu * gtv.data()[i];
    }

    // Jacobi preconditioner; grad^T grad has constant diagonal 4.
    ImagePlane diag = lorig_detail::data_term_diagonal(seq, hr_h, hr_w);
    for (double& d : diag.data()) {
        d += beta + 4.0 * mu;
        if (d <= 0.0) d = 1.0;
    }

    const auto precondition = [&](const ImagePlane& img) {
        ImagePlane out(hr_h, hr_w);
        for (std::size_t i = 0; i < out.size(); ++i) out.data()[i] = img.data()[i] / diag.data()[i];
        return out;
    };

    ImagePlane z = warm_start;
    ImagePlane r = b;
    {
        const ImagePlane az = lorig_detail::apply_normal_operator(seq, z, beta, mu);
        for (std::size_t i = 0; i < r.size(); ++i) r.data()[i] -= az.data()[i];
    }
    const double b_norm = std::sqrt(dot(b, precondition(b)));
    const double stop_norm = b_norm > 0.0 ? b_norm : 1.0;

    ImagePlane y = precondition(r);
    double r_norm = std::sqrt(std::max(0.0, dot(r, y)));
    ImagePlane ay = lorig_detail::apply_normal_operator(seq, y, beta, mu);
    double rho = dot(y, ay);  // y^T A y
    ImagePlane p = y;
    ImagePlane ap = ay;

    CgReport rep;
    rep.residual_norms.push_back(r_norm);

    int it = 0;
    while (it < cg_max_iters && r_norm / stop_norm > cg_tolerance) {
        const ImagePlane map = precondition(ap);
        const double denom = dot(ap, map);
        if (!(denom > 0.0) || !(rho > 0.0))
            throw SolverError("solve_z_cg: breakdown (non-positive curvature)");
        const double alpha = rho / denom;
        for (std::size_t i = 0; i < z.size(); ++i) z.data()[i] += alpha * p.data()[i];
        for (std::size_t i = 0; i < r.size(); ++i) r.data()[i] -= alpha * ap.data()[i];
        y = precondition(r);
        r_norm = std::sqrt(std::max(0.0, dot(r, y)));
        ay = lorig_detail::apply_normal_operator(seq, y, beta, mu);
        const double rho_next = dot(y, ay);
        const double omega = rho_next / rho;
        for (std::size_t i = 0; i < p.size(); ++i) p.data()[i] = y.data()[i] + omega * p.data()[i];
        for (std::size_t i = 0; i < ap.size(); ++i) ap.data()[i] = ay.data()[i] + omega * ap.data()[i];
        rho = rho_next;
        rep.residual_norms.push_back(r_norm);
        ++it;
    }
    if (!z.all_finite()) throw NumericError("solve_z_cg: diverged to non-finite values");

    rep.iterations = it;
    rep.final_relative_residual = r_norm / stop_norm;
    if (report) *report = rep;
    return z;
}

struct LorigIterationLog {
    int iteration = 0;
    double fidelity = 0.0;  // sum_k ||g_k - W_k z||^2
    double beta = 0.0;
    double mu = 0.0;
    int cg_iterations = 0;
    double cg_relative_residual = 0.0;
};

inline double data_fidelity(const FrameSequence& seq, const ImagePlane& z) {
    double acc = 0.0;
    for (int k = 0; k < seq.count(); ++k) {
        const ImagePlane wz = apply_W(z, seq.motions[k], seq.spec);
        for (std::size_t i = 0; i < wz.size(); ++i) {
            const double d = seq.frames[k].data()[i] - wz.data()[i];
            acc += d * d;
        }
    }
    return acc;
}

namespace lorig_detail {

// Reconstructing below the sequence's full degradation scale (the cascade's
// intermediate stage) re-expresses the observation model on the coarser
// grid: motions and the Gaussian blur width scale with the grid pitch.
inline FrameSequence rescale_observation_model(const FrameSequence& seq, int scale) {
    if (seq.spec.scale == scale) return seq;
    const double rho = static_cast<double>(scale) / seq.spec.scale;
    FrameSequence out = seq;
    out.spec.scale = scale;
    if (seq.spec.blur.radius() > 0) {
        if (!(seq.spec.blur_sigma > 0.0))
            throw ParameterError(
                "lorig_reconstruct: cannot rescale a non-Gaussian blur kernel to another stage scale");
        const double sigma = seq.spec.blur_sigma * rho;
        const int radius =
            std::max(1, static_cast<int>(std::lround(seq.spec.blur.radius() * rho)));
        out.spec.blur = gaussian_kernel(sigma, radius);
        out.spec.blur_sigma = sigma;
    }
    for (Motion& m : out.motions) {
        m.dx *= rho;
        m.dy *= rho;
    }
    return out;
}

}  // namespace lorig_detail

// Full reconstruction: bicubic initialization, max_outer sweeps of
// (u, v, z) updates with the decaying penalty schedule, final clip to [0,1].
inline ImagePlane lorig_reconstruct(const FrameSequence& seq_in, const LorigConfig& cfg, int scale,
                                    std::vector<LorigIterationLog>* log = nullptr) {
    cfg.validate();
    seq_in.validate();
    if (scale < 1) throw ParameterError("lorig_reconstruct: scale must be >= 1");
    const FrameSequence seq = lorig_detail::rescale_observation_model(seq_in, scale);

    LorigState state;
    state.z = resize_bicubic(seq.reference(), static_cast<double>(scale));
    state.beta = cfg.beta0;
    state.mu = cfg.mu0;

    for (state.iteration = 1; state.iteration <= cfg.max_outer; ++state.iteration) {
        state.u = solve_u(state.z, cfg.lambda, state.beta);
        state.v = solve_v(gradient_forward(state.z), cfg.lambda, state.mu,
                          cfg.gradient_threshold_mode);
        CgReport cg;
        state.z = solve_z_cg(seq, state.u, state.v, state.beta, state.mu, cfg.cg_max_iters,
                             cfg.cg_tolerance, state.z, &cg);
        if (log) {
            LorigIterationLog entry;
            entry.iteration = state.iteration;
            entry.fidelity = data_fidelity(seq, state.z);
            entry.beta = state.beta;
            entry.mu = state.mu;
            entry.cg_iterations = cg.iterations;
            entry.cg_relative_residual = cg.final_relative_residual;
            log->push_back(entry);
        }
        state.beta *= cfg.penalty_decay;
        state.mu *= cfg.penalty_decay;
    }
    return clip01(std::move(state.z));
}

inline void write_lorig_log_csv(const std::string& path, const std::vector<LorigIterationLog>& log) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    out << "iteration,fidelity,beta,mu,cg_iterations,cg_relative_residual\n";
    out.precision(17);
    for (const auto& e : log)
        out << e.iteration << "," << e.fidelity << "," << e.beta << "," << e.mu << ","
            << e.cg_iterations << "," << e.cg_relative_residual << "\n";
}

// Lambda grid search: powers of two spanning [lo, hi], scored by PSNR of the
// reconstruction against a validation image. Returns the winning lambda.
struct LambdaSearchResult {
    double lambda = 0.0;
    double psnr_db = 0.0;
};

inline std::vector<LambdaSearchResult> gridsearch_lambda(
    const FrameSequence& seq, const LorigConfig& base, int scale, const ImagePlane& validation_hr,
    double lo, double hi, const std::function<double(const ImagePlane&, const ImagePlane&)>& score) {
    if (!(lo > 0.0) || !(hi >= lo)) throw ParameterError("gridsearch_lambda: bad range");
    std::vector<LambdaSearchResult> results;
    for (double lambda = lo; lambda <= hi * (1.0 + 1e-12); lambda *= 2.0) {
        LorigConfig cfg = base;
        cfg.lambda = lambda;
        const ImagePlane z = lorig_reconstruct(seq, cfg, scale);
        results.push_back({lambda, score(validation_hr, z)});
    }
    return results;
}

}  // namespace cascsr
