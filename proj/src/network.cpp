#include "ecprune/network.hpp"

#include <cmath>
#include <stdexcept>

#include "ecprune/rng.hpp"

namespace ecprune {

Network::Network(std::vector<Layer> ls) : layers(std::move(ls)) { validate(); }

std::size_t Network::weight_count() const {
    std::size_t n = 0;
    for (const auto& l : layers) n += l.weights.size();
    return n;
}

std::size_t Network::param_count() const {
    std::size_t n = 0;
    for (const auto& l : layers) {
        n += l.weights.size() + l.bias.size();
        if (act_has_slope(l.activation.kind)) n += 1;
    }
    return n;
}

void Network::validate() const {
    if (layers.empty()) throw std::invalid_argument("network has no layers");
    for (std::size_t l = 0; l < layers.size(); ++l) {
        const Layer& layer = layers[l];
        if (layer.weights.rows == 0 || layer.weights.cols == 0)
            throw std::invalid_argument("layer " + std::to_string(l) + " has empty weights");
        if (layer.weights.rows != layer.bias.size())
            throw std::invalid_argument("layer " + std::to_string(l) +
                                        ": weight rows do not match bias length");
        if (l > 0 && layer.weights.cols != layers[l - 1].weights.rows)
            throw std::invalid_argument("layer " + std::to_string(l) +
                                        ": input width does not match previous layer");
        for (double w : layer.weights.data)
            if (!std::isfinite(w))
                throw std::invalid_argument("layer " + std::to_string(l) +
                                            " has a non-finite weight");
        for (double b : layer.bias)
            if (!std::isfinite(b))
                throw std::invalid_argument("layer " + std::to_string(l) +
                                            " has a non-finite bias");
        if (!std::isfinite(layer.activation.slope))
            throw std::invalid_argument("layer " + std::to_string(l) +
                                        " has a non-finite activation slope");
    }
    if (layers.back().activation.kind != ActKind::Identity)
        throw std::invalid_argument("last layer activation must be the identity");
}

ParamSet zeros_like(const Network& net) {
    ParamSet p;
    p.weights.reserve(net.depth());
    p.biases.reserve(net.depth());
    p.slopes.assign(net.depth(), 0.0);
    for (const auto& l : net.layers) {
        p.weights.emplace_back(l.weights.rows, l.weights.cols, 0.0);
        p.biases.emplace_back(l.bias.size(), 0.0);
    }
    return p;
}

Network make_mlp(const std::vector<std::size_t>& sizes, ActKind hidden, std::uint64_t seed) {
    if (sizes.size() < 2) throw std::invalid_argument("architecture needs at least two sizes");
    auto gen = make_engine(mix_seed(seed, 0x696E6974ULL)); // "init"
    std::vector<Layer> layers;
    layers.reserve(sizes.size() - 1);
    for (std::size_t l = 1; l < sizes.size(); ++l) {
        Layer layer;
        layer.weights = Matrix(sizes[l], sizes[l - 1]);
        layer.bias.assign(sizes[l], 0.0);
        const double bound = std::sqrt(6.0 / static_cast<double>(sizes[l - 1]));
        for (double& w : layer.weights.data) w = uniform_real(gen, -bound, bound);
        const bool last = (l == sizes.size() - 1);
        layer.activation.kind = last ? ActKind::Identity : hidden;
        layers.push_back(std::move(layer));
    }
    return Network(std::move(layers));
}

namespace {

void ensure_finite(const Vector& a, std::size_t layer_idx) {
    for (double v : a)
        if (!std::isfinite(v))
            throw std::runtime_error("non-finite value in layer " + std::to_string(layer_idx));
}

} // namespace

void forward_into(const Network& net, const MaskSet* mask, const Vector& x, ForwardTrace& trace) {
    if (x.size() != net.input_dim()) throw std::invalid_argument("input dimension mismatch");
    if (mask && mask->layers.size() != net.depth())
        throw std::invalid_argument("mask layer count mismatch");

    const std::size_t L = net.depth();
    trace.input = x;
    trace.preactivations.resize(L);
    trace.activations.resize(L);

    const Vector* z = &trace.input;
    for (std::size_t l = 0; l < L; ++l) {
        const Layer& layer = net.layers[l];
        const std::size_t n = layer.out_dim();
        const std::size_t m = layer.in_dim();
        if (z->size() != m) throw std::invalid_argument("layer input dimension mismatch");

        Vector& a = trace.preactivations[l];
        Vector& out = trace.activations[l];
        a.resize(n);
        out.resize(n);

        if (mask) {
            const auto& lm = mask->layers[l];
            if (lm.rows != n || lm.cols != m)
                throw std::invalid_argument("mask shape mismatch at layer " + std::to_string(l));
            for (std::size_t i = 0; i < n; ++i) {
                const double* w = layer.weights.row(i);
                const std::uint8_t* keep = lm.keep.data() + i * m;
                double acc = layer.bias[i];
                for (std::size_t j = 0; j < m; ++j)
                    acc += (keep[j] ? w[j] : 0.0) * (*z)[j];
                a[i] = acc;
            }
        } else {
            for (std::size_t i = 0; i < n; ++i) {
                const double* w = layer.weights.row(i);
                double acc = layer.bias[i];
                for (std::size_t j = 0; j < m; ++j) acc += w[j] * (*z)[j];
                a[i] = acc;
            }
        }
        ensure_finite(a, l);
        for (std::size_t i = 0; i < n; ++i) out[i] = act_value(layer.activation, a[i]);
        z = &out;
    }
}

ForwardTrace forward(const Network& net, const Vector& x) {
    ForwardTrace trace;
    forward_into(net, nullptr, x, trace);
    return trace;
}

ForwardTrace masked_forward(const Network& net, const MaskSet& mask, const Vector& x) {
    ForwardTrace trace;
    forward_into(net, &mask, x, trace);
    return trace;
}

void bias_sensitivity_sweep(const Network& net, const ForwardTrace& trace, std::size_t k,
                            std::vector<Vector>& sens) {
    const std::size_t L = net.depth();
    sens.resize(L);
    // Identity output layer: d y_k / d a^{L-1} is the k-th basis vector.
    sens[L - 1].assign(net.output_dim(), 0.0);
    sens[L - 1][k] = 1.0;

    for (std::size_t l = L - 1; l > 0; --l) {
        const Layer& layer = net.layers[l];
        const Layer& below = net.layers[l - 1];
        const std::size_t n = layer.out_dim();
        const std::size_t m = layer.in_dim();
        Vector& prev = sens[l - 1];
        prev.assign(m, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            const double si = sens[l][i];
            if (si == 0.0) continue;
            const double* w = layer.weights.row(i);
            for (std::size_t j = 0; j < m; ++j) prev[j] += si * w[j];
        }
        const Vector& a = trace.preactivations[l - 1];
        for (std::size_t j = 0; j < m; ++j) prev[j] *= act_derivative(below.activation, a[j]);
    }
}

BiasSensitivities output_bias_jacobian(const Network& net, const Vector& x) {
    const ForwardTrace trace = forward(net, x);
    BiasSensitivities out;
    out.g.resize(net.output_dim());
    for (std::size_t k = 0; k < net.output_dim(); ++k) {
        bias_sensitivity_sweep(net, trace, k, out.g[k]);
        for (std::size_t l = 0; l < out.g[k].size(); ++l) ensure_finite(out.g[k][l], l);
    }
    return out;
}

double signal(const Network& net, const ForwardTrace& trace, std::size_t l, std::size_t i,
              std::size_t j) {
    return net.layers[l].weights(i, j) * trace.layer_input(l)[j];
}

MaskSet ones_mask(const Network& net) {
    MaskSet mask;
    mask.layers.reserve(net.depth());
    for (const auto& l : net.layers)
        mask.layers.emplace_back(l.weights.rows, l.weights.cols, std::uint8_t{1});
    return mask;
}

} // namespace ecprune
