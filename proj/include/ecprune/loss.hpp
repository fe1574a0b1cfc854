#pragma once

#include <string>

#include "ecprune/dataset.hpp"
#include "ecprune/network.hpp"

namespace ecprune {

enum class LossKind { SoftmaxCrossEntropy, MeanSquaredError };

std::string loss_name(LossKind kind);
LossKind loss_from_name(const std::string& name);

// Throws unless (SoftmaxCrossEntropy, Classification) or
// (MeanSquaredError, Regression).
void check_loss_compatible(LossKind kind, const Dataset& data);

// Loss of one network output against sample `idx` of the dataset.
// SoftmaxCrossEntropy applies a stabilized softmax to the raw outputs;
// MeanSquaredError averages the squared error over output components.
double sample_loss(const Vector& y, const Dataset& data, std::size_t idx, LossKind kind);

// Same, also writing dL/dy into dldy.
double sample_loss_grad(const Vector& y, const Dataset& data, std::size_t idx, LossKind kind,
                        Vector& dldy);

// Mean per-sample loss over the whole dataset. Dispatches to the serial
// reference or the OpenMP kernel depending on max_jobs().
double dataset_loss(const Network& net, const MaskSet* mask, const Dataset& data, LossKind kind);
double dataset_loss_serial(const Network& net, const MaskSet* mask, const Dataset& data,
                           LossKind kind);
double dataset_loss_parallel(const Network& net, const MaskSet* mask, const Dataset& data,
                             LossKind kind, int jobs);

} // namespace ecprune
