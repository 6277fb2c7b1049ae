#pragma once

#include "hedonia/network.hpp"

namespace hedonia {

struct AdamState {
    std::size_t step = 0;
    double learning_rate = 0.001;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    std::vector<std::vector<double>> first_moment;
    std::vector<std::vector<double>> second_moment;

    static AdamState for_weights(const Weights& w, double lr = 0.001);
};

// Standard bias-corrected ADAM update. Throws NumericError on non-finite
// gradients, leaving weights and state untouched.
void adam_step(Weights& weights, const GradientBundle& grads, AdamState& state);

}  // namespace hedonia
