#pragma once

#include <string>

#include "cascsr/degradation.hpp"
#include "cascsr/erbpn.hpp"
#include "cascsr/errors.hpp"
#include "cascsr/lorig.hpp"

namespace cascsr {

// Two-stage reconstruction over a registered sequence. MFSF runs the
// multi-frame solver first and feeds its output to the network; SFMF enhances
// every frame with the network first and reconstructs from the enhanced
// sequence. The stage outputs stay in double precision between stages; the
// only range handling is each stage's own [0,1] clip.

enum class CascadeOrder { Mfsf, Sfmf };

struct CascadePlan {
    CascadeOrder order = CascadeOrder::Mfsf;
    int stage1_scale = 2;
    int stage2_scale = 2;
    LorigConfig lorig_cfg;
    const ErbpnModel* model = nullptr;

    int total_scale() const { return stage1_scale * stage2_scale; }

    void validate() const {
        if (stage1_scale < 1 || stage2_scale < 1)
            throw ParameterError("CascadePlan: stage scales must be >= 1");
        if (model == nullptr) throw ParameterError("CascadePlan: missing network model");
        lorig_cfg.validate();
        const int network_stage = order == CascadeOrder::Mfsf ? stage2_scale : stage1_scale;
        if (model->scale != network_stage)
            throw ParameterError("CascadePlan: model scale does not match its stage");
    }
};

struct CascadeStats {
    int network_inferences = 0;
    int reconstructions = 0;
};

// Multi-frame first, single-frame after: one reconstruction, one inference.
inline ImagePlane mfsf_sr(const FrameSequence& seq, const CascadePlan& plan,
                          CascadeStats* stats = nullptr) {
    plan.validate();
    if (plan.order != CascadeOrder::Mfsf) throw ParameterError("mfsf_sr: plan order is not MFSF");
    seq.validate();
    if (seq.spec.scale != plan.total_scale())
        throw ParameterError("mfsf_sr: sequence scale does not match plan");

    const ImagePlane intermediate = lorig_reconstruct(seq, plan.lorig_cfg, plan.stage1_scale);
    const ImagePlane out = erbpn_forward(intermediate, *plan.model);
    if (stats) {
        stats->reconstructions = 1;
        stats->network_inferences = 1;
    }
    return out;
}

// Single-frame first, multi-frame after: K inferences, one reconstruction.
// Frame motions are rescaled to the enhanced grid (pixels scale with it).
inline ImagePlane sfmf_sr(const FrameSequence& seq, const CascadePlan& plan,
                          CascadeStats* stats = nullptr) {
    plan.validate();
    if (plan.order != CascadeOrder::Sfmf) throw ParameterError("sfmf_sr: plan order is not SFMF");
    seq.validate();
    if (seq.spec.scale != plan.total_scale())
        throw ParameterError("sfmf_sr: sequence scale does not match plan");

    FrameSequence enhanced;
    enhanced.spec = seq.spec;
    enhanced.spec.scale = plan.stage2_scale;
    enhanced.spec.noise_variance = 0.0;
    enhanced.reference_index = seq.reference_index;
    int inferences = 0;
    for (int k = 0; k < seq.count(); ++k) {
        enhanced.frames.push_back(erbpn_forward(seq.frames[k], *plan.model));
        ++inferences;
        // In frame pixels the shift grows by stage1_scale with the enhanced
        // grid; stored in HR-grid pixels (s1*s2 * LR = the original HR grid)
        // the value is unchanged.
        enhanced.motions.push_back(seq.motions[k]);
    }
    const ImagePlane out = lorig_reconstruct(enhanced, plan.lorig_cfg, plan.stage2_scale);
    if (stats) {
        stats->reconstructions = 1;
        stats->network_inferences = inferences;
    }
    return out;
}

}  // namespace cascsr
