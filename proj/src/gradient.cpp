#include "ecprune/gradient.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "ecprune/threading.hpp"

namespace ecprune {

namespace {

// Accumulates the (unnormalized) gradient of one sample into `acc` and
// returns the sample loss. Scratch buffers avoid per-sample allocation.
struct SampleScratch {
    ForwardTrace trace;
    Vector x;
    Vector dldy;
    Vector u;    // dL/da of the current layer
    Vector prev; // dL/dz of the layer below
};

double accumulate_sample(const Network& net, const MaskSet* mask, const Dataset& data,
                         std::size_t sample, LossKind kind, ParamSet& acc, SampleScratch& s) {
    const std::size_t n_in = data.input_dim();
    const double* row = data.inputs.row(sample);
    s.x.assign(row, row + n_in);
    forward_into(net, mask, s.x, s.trace);

    const double loss = sample_loss_grad(s.trace.output(), data, sample, kind, s.dldy);

    const std::size_t L = net.depth();
    // Identity output activation: dL/da^{L-1} = dL/dy.
    s.u = s.dldy;
    for (std::size_t l = L; l-- > 0;) {
        const Layer& layer = net.layers[l];
        const std::size_t n = layer.out_dim();
        const std::size_t m = layer.in_dim();
        const Vector& z = s.trace.layer_input(l);

        Matrix& gw = acc.weights[l];
        Vector& gb = acc.biases[l];
        for (std::size_t i = 0; i < n; ++i) {
            const double ui = s.u[i];
            gb[i] += ui;
            double* gwr = gw.row(i);
            if (mask) {
                const auto& lm = mask->layers[l];
                const std::uint8_t* keep = lm.keep.data() + i * m;
                for (std::size_t j = 0; j < m; ++j)
                    if (keep[j]) gwr[j] += ui * z[j];
            } else {
                for (std::size_t j = 0; j < m; ++j) gwr[j] += ui * z[j];
            }
        }

        if (l == 0) break;

        // dL/dz^{l-1} through the (masked) weights.
        s.prev.assign(m, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            const double ui = s.u[i];
            if (ui == 0.0) continue;
            const double* w = layer.weights.row(i);
            if (mask) {
                const std::uint8_t* keep = mask->layers[l].keep.data() + i * m;
                for (std::size_t j = 0; j < m; ++j)
                    if (keep[j]) s.prev[j] += ui * w[j];
            } else {
                for (std::size_t j = 0; j < m; ++j) s.prev[j] += ui * w[j];
            }
        }

        const Layer& below = net.layers[l - 1];
        const Vector& a = s.trace.preactivations[l - 1];
        if (act_has_slope(below.activation.kind)) {
            double gs = 0.0;
            for (std::size_t j = 0; j < m; ++j)
                gs += s.prev[j] * act_slope_derivative(below.activation, a[j]);
            acc.slopes[l - 1] += gs;
        }
        s.u.resize(m);
        for (std::size_t j = 0; j < m; ++j)
            s.u[j] = s.prev[j] * act_derivative(below.activation, a[j]);
    }
    return loss;
}

void scale_params(ParamSet& p, double factor) {
    for (auto& w : p.weights)
        for (double& v : w.data) v *= factor;
    for (auto& b : p.biases)
        for (double& v : b) v *= factor;
    for (double& v : p.slopes) v *= factor;
}

void add_params(ParamSet& into, const ParamSet& from) {
    for (std::size_t l = 0; l < into.weights.size(); ++l) {
        for (std::size_t i = 0; i < into.weights[l].data.size(); ++i)
            into.weights[l].data[i] += from.weights[l].data[i];
        for (std::size_t i = 0; i < into.biases[l].size(); ++i)
            into.biases[l][i] += from.biases[l][i];
        into.slopes[l] += from.slopes[l];
    }
}

} // namespace

BatchGradient loss_gradient_serial(const Network& net, const MaskSet* mask, const Dataset& data,
                                   std::span<const std::size_t> batch, LossKind kind) {
    check_loss_compatible(kind, data);
    if (batch.empty()) throw std::invalid_argument("empty batch");

    BatchGradient out{zeros_like(net), 0.0};
    SampleScratch scratch;
    double loss_acc = 0.0;
    for (std::size_t sample : batch)
        loss_acc += accumulate_sample(net, mask, data, sample, kind, out.grads, scratch);

    const double inv = 1.0 / static_cast<double>(batch.size());
    scale_params(out.grads, inv);
    out.mean_loss = loss_acc * inv;
    return out;
}

BatchGradient loss_gradient_parallel(const Network& net, const MaskSet* mask, const Dataset& data,
                                     std::span<const std::size_t> batch, LossKind kind, int jobs) {
    check_loss_compatible(kind, data);
    if (batch.empty()) throw std::invalid_argument("empty batch");

    std::vector<ParamSet> partial(static_cast<std::size_t>(jobs));
    std::vector<double> partial_loss(static_cast<std::size_t>(jobs), 0.0);
#pragma omp parallel num_threads(jobs)
    {
#ifdef _OPENMP
        const std::size_t tid = static_cast<std::size_t>(omp_get_thread_num());
#else
        const std::size_t tid = 0;
#endif
        partial[tid] = zeros_like(net);
        SampleScratch scratch;
        double local = 0.0;
#pragma omp for schedule(static)
        for (std::ptrdiff_t b = 0; b < static_cast<std::ptrdiff_t>(batch.size()); ++b)
            local += accumulate_sample(net, mask, data, batch[static_cast<std::size_t>(b)], kind,
                                       partial[tid], scratch);
        partial_loss[tid] = local;
    }

    BatchGradient out{zeros_like(net), 0.0};
    double loss_acc = 0.0;
    // Reduce in thread order: deterministic for a fixed worker count.
    for (std::size_t t = 0; t < partial.size(); ++t) {
        if (partial[t].weights.empty()) continue; // thread saw no iterations
        add_params(out.grads, partial[t]);
        loss_acc += partial_loss[t];
    }
    const double inv = 1.0 / static_cast<double>(batch.size());
    scale_params(out.grads, inv);
    out.mean_loss = loss_acc * inv;
    return out;
}

BatchGradient loss_gradient(const Network& net, const MaskSet* mask, const Dataset& data,
                            std::span<const std::size_t> batch, LossKind kind) {
    const int jobs = max_jobs();
    if (jobs <= 1) return loss_gradient_serial(net, mask, data, batch, kind);
    return loss_gradient_parallel(net, mask, data, batch, kind, jobs);
}

BatchGradient loss_gradient(const Network& net, const MaskSet* mask, const Dataset& data,
                            LossKind kind) {
    std::vector<std::size_t> all(data.size());
    std::iota(all.begin(), all.end(), std::size_t{0});
    return loss_gradient(net, mask, data, all, kind);
}

} // namespace ecprune
