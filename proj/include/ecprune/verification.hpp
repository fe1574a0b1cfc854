#pragma once

#include "ecprune/loss.hpp"
#include "ecprune/network.hpp"

namespace ecprune {

// Independent oracles for tests and acceptance runs. These are written as
// naive loops on purpose and do not share code with the forward/backward
// implementations they check. None of this is performance-sensitive.

struct FdSpec {
    double step = 1e-5; // central differences
};

enum class FdTarget { Weights, Biases, Slopes };

// Naive re-implementation of network evaluation.
Vector naive_forward(const Network& net, const Vector& x);

// Naive mean loss over a dataset (own softmax / squared-error code).
double naive_dataset_loss(const Network& net, const Dataset& data, LossKind kind);

// Central-difference d y_k / d param for one input; result[k] holds the
// derivatives of output component k in the slots of the requested family.
// Guarded to networks with at most 10^4 parameters.
std::vector<ParamSet> fd_output_jacobian(const Network& net, const Vector& x, FdTarget target,
                                         const FdSpec& spec = {});

// Central-difference gradient of the mean dataset loss w.r.t. every
// trainable parameter. Same size guard.
ParamSet fd_loss_gradient(const Network& net, const Dataset& data, LossKind kind,
                          const FdSpec& spec = {});

// E_x || y(x) - y_surgery(x) ||^2 where the surgery zeroes weight (l, i, j)
// and adds delta_b to bias i of layer l; evaluated by literal re-evaluation
// with naive_forward on every sample.
double brute_discrepancy(const Network& net, const Dataset& data, std::size_t l, std::size_t i,
                         std::size_t j, double delta_b);

} // namespace ecprune
