#pragma once

#include <span>

#include "ecprune/loss.hpp"
#include "ecprune/network.hpp"

namespace ecprune {

struct BatchGradient {
    ParamSet grads;   // mean over the batch
    double mean_loss; // mean per-sample loss over the batch
};

// Mean gradient of the loss over the given samples with respect to every
// trainable parameter. With a mask, forward evaluation uses the masked
// weights and pruned weight entries receive gradient exactly 0.
BatchGradient loss_gradient(const Network& net, const MaskSet* mask, const Dataset& data,
                            std::span<const std::size_t> batch, LossKind kind);
BatchGradient loss_gradient_serial(const Network& net, const MaskSet* mask, const Dataset& data,
                                   std::span<const std::size_t> batch, LossKind kind);
BatchGradient loss_gradient_parallel(const Network& net, const MaskSet* mask, const Dataset& data,
                                     std::span<const std::size_t> batch, LossKind kind, int jobs);

// Gradient over the full dataset.
BatchGradient loss_gradient(const Network& net, const MaskSet* mask, const Dataset& data,
                            LossKind kind);

} // namespace ecprune
