#pragma once

#include <cstdint>

#include "ecprune/network.hpp"

namespace ecprune {

struct TrainConfig {
    int epochs = 15;
    int batch_size = 64;
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon_adam = 1e-8;
    std::uint64_t seed = 0; // mini-batch shuffling

    void validate() const;
};

// Adam moment accumulators, zero-initialized, shaped like the parameters.
struct OptimizerState {
    ParamSet m;
    ParamSet v;
    long step = 0;
};

OptimizerState make_optimizer_state(const Network& net);

// One Adam update with bias correction: p -= lr * m_hat / (sqrt(v_hat) + eps).
// Parameters whose gradient and moments are zero are left exactly unchanged.
// Throws on non-finite gradients.
void adam_step(OptimizerState& state, Network& net, const ParamSet& grads, const TrainConfig& cfg);

} // namespace ecprune
