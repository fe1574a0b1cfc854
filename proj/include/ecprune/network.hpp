#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ecprune/activation.hpp"
#include "ecprune/mask.hpp"
#include "ecprune/matrix.hpp"

namespace ecprune {

struct Layer {
    Matrix weights; // n_l x n_{l-1}
    Vector bias;    // n_l
    Activation activation;

    std::size_t out_dim() const { return weights.rows; }
    std::size_t in_dim() const { return weights.cols; }
};

// Fully-connected network. Immutable by convention after construction;
// training produces updated copies.
struct Network {
    std::vector<Layer> layers;

    Network() = default;
    explicit Network(std::vector<Layer> ls);

    std::size_t depth() const { return layers.size(); }
    std::size_t input_dim() const { return layers.front().in_dim(); }
    std::size_t output_dim() const { return layers.back().out_dim(); }

    // Weight-matrix entries only.
    std::size_t weight_count() const;
    // All trainable parameters: weights, biases and PReLU slopes.
    std::size_t param_count() const;

    // Throws if dimensions do not chain, the last activation is not the
    // identity, or any parameter is non-finite.
    void validate() const;
};

// Parameter-shaped container (one slot per trainable parameter of a
// network); used for gradients, optimizer moments and derivative oracles.
struct ParamSet {
    std::vector<Matrix> weights;
    std::vector<Vector> biases;
    std::vector<double> slopes; // one per layer, meaningful for PReLU only
};

ParamSet zeros_like(const Network& net);

struct ForwardTrace {
    Vector input;                       // z^0 = x
    std::vector<Vector> preactivations; // a^l
    std::vector<Vector> activations;    // z^l = act(a^l)

    const Vector& output() const { return activations.back(); }
    // z^{l-1}, the vector feeding layer l.
    const Vector& layer_input(std::size_t l) const {
        return l == 0 ? input : activations[l - 1];
    }
};

// g[k][l][i] = d y_k / d b^l_i at a single input, computed by one reverse
// sweep per output component from a shared forward trace.
struct BiasSensitivities {
    std::vector<std::vector<Vector>> g;
};

Network make_mlp(const std::vector<std::size_t>& sizes, ActKind hidden, std::uint64_t seed);

ForwardTrace forward(const Network& net, const Vector& x);
ForwardTrace masked_forward(const Network& net, const MaskSet& mask, const Vector& x);

// In-place variants reusing the trace buffers; mask may be null.
void forward_into(const Network& net, const MaskSet* mask, const Vector& x, ForwardTrace& trace);

BiasSensitivities output_bias_jacobian(const Network& net, const Vector& x);

// Reverse sweep for a single output component from an existing trace;
// writes d y_k / d a^l into sens[l] (equal to d y_k / d b^l).
void bias_sensitivity_sweep(const Network& net, const ForwardTrace& trace, std::size_t k,
                            std::vector<Vector>& sens);

// The value flowing through connection (l, i, j): W^l_ij * z^{l-1}_j.
double signal(const Network& net, const ForwardTrace& trace, std::size_t l, std::size_t i,
              std::size_t j);

MaskSet ones_mask(const Network& net);

} // namespace ecprune
