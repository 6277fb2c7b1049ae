#include "hedonia/optim.hpp"

#include <cmath>

namespace hedonia {

AdamState AdamState::for_weights(const Weights& w, double lr) {
    AdamState s;
    s.learning_rate = lr;
    for (const auto& l : w.layers) {
        s.first_moment.emplace_back(l.size(), 0.0);
        s.second_moment.emplace_back(l.size(), 0.0);
    }
    return s;
}

void adam_step(Weights& weights, const GradientBundle& grads,
               AdamState& state) {
    if (grads.size() != weights.layers.size())
        throw NumericError("adam_step: gradient/weight layout mismatch");
    for (std::size_t i = 0; i < grads.size(); ++i) {
        if (grads[i].size() != weights.layers[i].size())
            throw NumericError("adam_step: gradient/weight layout mismatch at layer " +
                               std::to_string(i));
        for (double g : grads[i])
            if (!std::isfinite(g))
                throw NumericError("adam_step: non-finite gradient");
    }
    state.step += 1;
    const double t = static_cast<double>(state.step);
    const double bc1 = 1.0 - std::pow(state.beta1, t);
    const double bc2 = 1.0 - std::pow(state.beta2, t);
    for (std::size_t i = 0; i < grads.size(); ++i) {
        auto& w = weights.layers[i];
        auto& m = state.first_moment[i];
        auto& v = state.second_moment[i];
        const auto& g = grads[i];
        for (std::size_t j = 0; j < w.size(); ++j) {
            m[j] = state.beta1 * m[j] + (1.0 - state.beta1) * g[j];
            v[j] = state.beta2 * v[j] + (1.0 - state.beta2) * g[j] * g[j];
            const double mhat = m[j] / bc1;
            const double vhat = v[j] / bc2;
            w[j] -= state.learning_rate * mhat / (std::sqrt(vhat) + state.epsilon);
        }
    }
}

}  // namespace hedonia
