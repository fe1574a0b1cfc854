#pragma once

#include "ecprune/adam.hpp"
#include "ecprune/gradient.hpp"

namespace ecprune {

struct TrainResult {
    Network net;
    std::vector<double> loss_history; // mean training loss per epoch
};

// Mini-batch Adam training. Deterministic for a fixed seed when max_jobs()
// is 1. With a mask, pruned weights stay exactly zero after every step and
// their optimizer moments never leave zero.
TrainResult train(const Network& net, const MaskSet* mask, const Dataset& data,
                  const TrainConfig& cfg, LossKind kind);

} // namespace ecprune
