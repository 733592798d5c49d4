#pragma once

#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "cascsr/adam.hpp"
#include "cascsr/erbpn.hpp"
#include "cascsr/errors.hpp"
#include "cascsr/image.hpp"
#include "cascsr/rng.hpp"
#include "cascsr/tensor.hpp"

namespace cascsr {

// Training: MSE loss, seeded patch sampling with dihedral augmentation, and a
// deterministic mini-batch loop. Loss follows the per-image convention
// loss = (1/N) sum_i ||z_i - z'_i||^2 with N the batch image count.

struct MseLoss {
    double value = 0.0;
    Tensor4 grad;  // d loss / d pred
};

inline MseLoss mse_loss(const Tensor4& pred, const Tensor4& target) {
    if (!pred.same_shape(target)) throw ParameterError("mse_loss: shape mismatch");
    MseLoss out;
    out.grad = Tensor4(pred.n(), pred.c(), pred.h(), pred.w());
    const double inv_n = 1.0 / static_cast<double>(pred.n());
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const double d = pred.data()[i] - target.data()[i];
        out.value += d * d;
        out.grad.data()[i] = 2.0 * d * inv_n;
    }
    out.value *= inv_n;
    return out;
}

// Dihedral transforms 0..7: rotation by 90*k degrees, optionally composed
// with a horizontal flip. 0 is identity, 2 is the 180-degree rotation.
inline ImagePlane dihedral_transform(const ImagePlane& img, int op) {
    if (op < 0 || op > 7) throw ParameterError("dihedral_transform: op must be in 0..7");
    const int rot = op % 4;
    const bool flip = op >= 4;
    const int h = img.height(), w = img.width();
    const int oh = rot % 2 == 0 ? h : w;
    const int ow = rot % 2 == 0 ? w : h;
    ImagePlane out(oh, ow);
    for (int i = 0; i < oh; ++i) {
        for (int j = 0; j < ow; ++j) {
            int si = 0, sj = 0;
            switch (rot) {
                case 0: si = i; sj = j; break;
                case 1: si = j; sj = w - 1 - i; break;
                case 2: si = h - 1 - i; sj = w - 1 - j; break;
                case 3: si = h - 1 - j; sj = i; break;
            }
            const int src_j = flip ? img.width() - 1 - sj : sj;
            out.at(i, j) = img.at(si, src_j);
        }
    }
    return out;
}

struct PatchPair {
    ImagePlane lr;
    ImagePlane hr;
};

// Degrades an HR image to the paired LR by bicubic downscaling. The standard
// single-frame training protocol; `paired` datasets skip this.
inline PatchPair make_bicubic_pair(const ImagePlane& hr, int scale) {
    if (hr.height() % scale != 0 || hr.width() % scale != 0)
        throw ParameterError("make_bicubic_pair: HR dimensions not divisible by scale");
    return PatchPair{resize_bicubic(hr, 1.0 / scale), hr};
}

struct TrainConfig {
    int epochs = 5;
    int steps_per_epoch = 50;
    int batch_size = 8;
    int patch_size = 32;  // HR pixels; must be divisible by the model scale
    double learning_rate = 1e-4;
    int lr_halflife_epochs = 100;
    bool augment = true;
    std::uint64_t seed = 0;
    std::string checkpoint_prefix;  // "<prefix>_epoch%03d.erbw" when non-empty
    std::string loss_csv_path;

    void validate(int scale) const {
        if (epochs < 1 || steps_per_epoch < 1 || batch_size < 1)
            throw ParameterError("TrainConfig: counts must be >= 1");
        if (patch_size < scale || patch_size % scale != 0)
            throw ParameterError("TrainConfig: patch size must be a positive multiple of scale");
        if (learning_rate <= 0.0) throw ParameterError("TrainConfig: learning rate must be positive");
    }
};

struct TrainReport {
    std::vector<double> step_losses;
    std::vector<double> epoch_mean_losses;
};

namespace train_detail {

inline ImagePlane crop(const ImagePlane& img, int top, int left, int size) {
    ImagePlane out(size, size);
    for (int i = 0; i < size; ++i)
        for (int j = 0; j < size; ++j) out.at(i, j) = img.at(top + i, left + j);
    return out;
}

// One aligned LR/HR patch pair with a shared augmentation op.
inline PatchPair sample_patch(const PatchPair& pair, int scale, int hr_patch, Rng& rng, bool augment) {
    const int lr_patch = hr_patch / scale;
    if (pair.lr.height() < lr_patch || pair.lr.width() < lr_patch)
        throw ParameterError("train: patch size exceeds dataset image");
    const int max_top = pair.lr.height() - lr_patch;
    const int max_left = pair.lr.width() - lr_patch;
    const int top = max_top == 0 ? 0 : static_cast<int>(rng.uniform_index(max_top + 1));
    const int left = max_left == 0 ? 0 : static_cast<int>(rng.uniform_index(max_left + 1));
    PatchPair out;
    out.lr = crop(pair.lr, top, left, lr_patch);
    out.hr = crop(pair.hr, top * scale, left * scale, hr_patch);
    if (augment) {
        const int op = static_cast<int>(rng.uniform_index(8));
        out.lr = dihedral_transform(out.lr, op);
        out.hr = dihedral_transform(out.hr, op);
    }
    return out;
}

inline Tensor4 stack(const std::vector<ImagePlane>& planes) {
    Tensor4 t(static_cast<int>(planes.size()), 1, planes.front().height(), planes.front().width());
    for (std::size_t n = 0; n < planes.size(); ++n)
        for (int i = 0; i < planes[n].height(); ++i)
            for (int j = 0; j < planes[n].width(); ++j)
                t.at(static_cast<int>(n), 0, i, j) = planes[n].at(i, j);
    return t;
}

}  // namespace train_detail

// Mini-batch ADAM training. Fully deterministic for a fixed seed: sampling,
// augmentation and the gradient reduction all follow one fixed order.
inline TrainReport train(ErbpnModel& model, const std::vector<PatchPair>& dataset,
                         const TrainConfig& cfg) {
    model.validate();
    cfg.validate(model.scale);
    if (dataset.empty()) throw ParameterError("train: empty dataset");
    for (const auto& p : dataset) {
        if (p.hr.height() != p.lr.height() * model.scale || p.hr.width() != p.lr.width() * model.scale)
            throw ParameterError("train: LR/HR pair dimensions inconsistent with scale");
        if (!p.lr.all_finite() || !p.hr.all_finite()) throw NumericError("train: non-finite dataset");
    }

    Rng rng(cfg.seed);
    AdamState adam = make_adam_state(model, cfg.learning_rate);
    TrainReport report;

    std::ofstream csv;
    if (!cfg.loss_csv_path.empty()) {
        csv.open(cfg.loss_csv_path);
        if (!csv) throw IoError("cannot write " + cfg.loss_csv_path);
        csv << "epoch,step,loss\n";
        csv.precision(17);
    }

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        adam.learning_rate =
            scheduled_learning_rate(cfg.learning_rate, epoch, cfg.lr_halflife_epochs);
        double epoch_loss = 0.0;
        for (int step = 0; step < cfg.steps_per_epoch; ++step) {
            std::vector<ImagePlane> lr_batch, hr_batch;
            for (int b = 0; b < cfg.batch_size; ++b) {
                const std::size_t pick = rng.uniform_index(dataset.size());
                const PatchPair patch = train_detail::sample_patch(dataset[pick], model.scale,
                                                                   cfg.patch_size, rng, cfg.augment);
                lr_batch.push_back(patch.lr);
                hr_batch.push_back(patch.hr);
            }
            const Tensor4 lr = train_detail::stack(lr_batch);
            const Tensor4 hr = train_detail::stack(hr_batch);

            ErbpnTrace trace;
            const Tensor4 pred = erbpn_forward_raw(lr, model, &trace);
            const MseLoss loss = mse_loss(pred, hr);
            ErbpnModel grads = zeros_like(model);
            erbpn_backward(loss.grad, trace, model, grads);
            adam_step(model, grads, adam);

            report.step_losses.push_back(loss.value);
            epoch_loss += loss.value;
            if (csv) csv << epoch << "," << step << "," << loss.value << "\n";
        }
        report.epoch_mean_losses.push_back(epoch_loss / cfg.steps_per_epoch);
        if (!cfg.checkpoint_prefix.empty()) {
            std::ostringstream name;
            name << cfg.checkpoint_prefix << "_epoch" << epoch << ".erbw";
            save_model(name.str(), model);
        }
    }
    return report;
}

}  // namespace cascsr
