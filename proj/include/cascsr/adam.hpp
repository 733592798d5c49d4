#pragma once

#include <cmath>
#include <cstdint>

#include "cascsr/erbpn.hpp"

namespace cascsr {

// Bias-corrected ADAM. Moment accumulators mirror the model structure so the
// canonical layer enumeration drives the update.
struct AdamState {
    ErbpnModel m;  // first moments
    ErbpnModel v;  // second moments
    long long step = 0;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    double learning_rate = 1e-4;
};

inline AdamState make_adam_state(const ErbpnModel& model, double learning_rate = 1e-4) {
    AdamState s;
    s.m = zeros_like(model);
    s.v = zeros_like(model);
    s.learning_rate = learning_rate;
    return s;
}

// Learning-rate schedule: halves every `halflife_epochs` epochs.
inline double scheduled_learning_rate(double base, int epoch, int halflife_epochs = 100) {
    if (halflife_epochs < 1) return base;
    return base * std::pow(0.5, static_cast<double>(epoch / halflife_epochs));
}

namespace adam_detail {

inline void update_block(double* p, const double* g, double* m, double* v, std::size_t n,
                         const AdamState& s, double bc1, double bc2) {
    for (std::size_t i = 0; i < n; ++i) {
        m[i] = s.beta1 * m[i] + (1.0 - s.beta1) * g[i];
        v[i] = s.beta2 * v[i] + (1.0 - s.beta2) * g[i] * g[i];
        const double mhat = m[i] / bc1;
        const double vhat = v[i] / bc2;
        p[i] -= s.learning_rate * mhat / (std::sqrt(vhat) + s.epsilon);
    }
}

}  // namespace adam_detail

inline void adam_step(ErbpnModel& model, const ErbpnModel& grads, AdamState& state) {
    ++state.step;
    const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
    const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));

    // Walk the three structures in lockstep via the canonical order.
    std::vector<LayerParams*> mp, gp, m1, m2;
    for_each_layer(model, [&](LayerParams& p) { mp.push_back(&p); });
    for_each_layer(const_cast<ErbpnModel&>(grads), [&](LayerParams& p) { gp.push_back(&p); });
    for_each_layer(state.m, [&](LayerParams& p) { m1.push_back(&p); });
    for_each_layer(state.v, [&](LayerParams& p) { m2.push_back(&p); });

    for (std::size_t l = 0; l < mp.size(); ++l) {
        adam_detail::update_block(mp[l]->weights.data().data(), gp[l]->weights.data().data(),
                                  m1[l]->weights.data().data(), m2[l]->weights.data().data(),
                                  mp[l]->weights.size(), state, bc1, bc2);
        adam_detail::update_block(mp[l]->bias.data(), gp[l]->bias.data(), m1[l]->bias.data(),
                                  m2[l]->bias.data(), mp[l]->bias.size(), state, bc1, bc2);
        adam_detail::update_block(mp[l]->slopes.data(), gp[l]->slopes.data(), m1[l]->slopes.data(),
                                  m2[l]->slopes.data(), mp[l]->slopes.size(), state, bc1, bc2);
    }
}

}  // namespace cascsr
