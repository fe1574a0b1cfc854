#include "ecprune/verification.hpp"

#include <cmath>
#include <stdexcept>

namespace ecprune {

namespace {

constexpr std::size_t kFdParamGuard = 10000;

double naive_activation(ActKind kind, double slope, double a) {
    if (kind == ActKind::Identity) return a;
    if (kind == ActKind::Tanh) return std::tanh(a);
    if (kind == ActKind::ReLU) return a > 0.0 ? a : 0.0;
    // PReLU
    if (a > 0.0) return a;
    return slope * a;
}

void check_guard(const Network& net) {
    if (net.param_count() > kFdParamGuard)
        throw std::invalid_argument("finite differences guarded to networks with <= 10^4 params");
}

} // namespace

Vector naive_forward(const Network& net, const Vector& x) {
    if (x.size() != net.input_dim()) throw std::invalid_argument("input dimension mismatch");
    Vector z = x;
    for (const Layer& layer : net.layers) {
        Vector next(layer.bias.size());
        for (std::size_t i = 0; i < layer.weights.rows; ++i) {
            double sum = layer.bias[i];
            for (std::size_t j = 0; j < layer.weights.cols; ++j)
                sum += layer.weights(i, j) * z[j];
            next[i] = naive_activation(layer.activation.kind, layer.activation.slope, sum);
        }
        z = std::move(next);
    }
    return z;
}

double naive_dataset_loss(const Network& net, const Dataset& data, LossKind kind) {
    check_loss_compatible(kind, data);
    double total = 0.0;
    for (std::size_t s = 0; s < data.size(); ++s) {
        Vector x(data.inputs.row(s), data.inputs.row(s) + data.input_dim());
        const Vector y = naive_forward(net, x);
        if (kind == LossKind::MeanSquaredError) {
            double acc = 0.0;
            for (std::size_t k = 0; k < y.size(); ++k) {
                const double d = y[k] - data.targets(s, k);
                acc += d * d;
            }
            total += acc / static_cast<double>(y.size());
        } else {
            double denom = 0.0;
            for (double v : y) denom += std::exp(v);
            const double p = std::exp(y[static_cast<std::size_t>(data.labels[s])]) / denom;
            total += -std::log(p);
        }
    }
    return total / static_cast<double>(data.size());
}

namespace {

template <typename Eval>
double central_difference(double& param, double h, Eval&& eval) {
    const double original = param;
    param = original + h;
    const double fp = eval();
    param = original - h;
    const double fm = eval();
    param = original;
    return (fp - fm) / (2.0 * h);
}

template <typename Eval>
Vector central_difference_vec(double& param, double h, Eval&& eval) {
    const double original = param;
    param = original + h;
    const Vector fp = eval();
    param = original - h;
    const Vector fm = eval();
    param = original;
    Vector d(fp.size());
    for (std::size_t k = 0; k < fp.size(); ++k) d[k] = (fp[k] - fm[k]) / (2.0 * h);
    return d;
}

} // namespace

std::vector<ParamSet> fd_output_jacobian(const Network& net, const Vector& x, FdTarget target,
                                         const FdSpec& spec) {
    check_guard(net);
    if (!(spec.step > 0.0)) throw std::invalid_argument("finite-difference step must be > 0");
    Network work = net;
    const std::size_t n_out = net.output_dim();
    std::vector<ParamSet> result(n_out);
    for (auto& p : result) p = zeros_like(net);

    auto eval = [&]() { return naive_forward(work, x); };

    for (std::size_t l = 0; l < net.depth(); ++l) {
        Layer& layer = work.layers[l];
        if (target == FdTarget::Weights) {
            for (std::size_t i = 0; i < layer.weights.data.size(); ++i) {
                const Vector d = central_difference_vec(layer.weights.data[i], spec.step, eval);
                for (std::size_t k = 0; k < n_out; ++k) result[k].weights[l].data[i] = d[k];
            }
        } else if (target == FdTarget::Biases) {
            for (std::size_t i = 0; i < layer.bias.size(); ++i) {
                const Vector d = central_difference_vec(layer.bias[i], spec.step, eval);
                for (std::size_t k = 0; k < n_out; ++k) result[k].biases[l][i] = d[k];
            }
        } else if (act_has_slope(layer.activation.kind)) {
            const Vector d = central_difference_vec(layer.activation.slope, spec.step, eval);
            for (std::size_t k = 0; k < n_out; ++k) result[k].slopes[l] = d[k];
        }
    }
    return result;
}

ParamSet fd_loss_gradient(const Network& net, const Dataset& data, LossKind kind,
                          const FdSpec& spec) {
    check_guard(net);
    if (!(spec.step > 0.0)) throw std::invalid_argument("finite-difference step must be > 0");
    Network work = net;
    ParamSet grad = zeros_like(net);

    auto eval = [&]() { return naive_dataset_loss(work, data, kind); };

    for (std::size_t l = 0; l < net.depth(); ++l) {
        Layer& layer = work.layers[l];
        for (std::size_t i = 0; i < layer.weights.data.size(); ++i)
            grad.weights[l].data[i] = central_difference(layer.weights.data[i], spec.step, eval);
        for (std::size_t i = 0; i < layer.bias.size(); ++i)
            grad.biases[l][i] = central_difference(layer.bias[i], spec.step, eval);
        if (act_has_slope(layer.activation.kind))
            grad.slopes[l] = central_difference(layer.activation.slope, spec.step, eval);
    }
    return grad;
}

double brute_discrepancy(const Network& net, const Dataset& data, std::size_t l, std::size_t i,
                         std::size_t j, double delta_b) {
    if (l >= net.depth()) throw std::invalid_argument("layer index out of range");
    Network surgery = net;
    surgery.layers[l].weights(i, j) = 0.0;
    surgery.layers[l].bias[i] += delta_b;

    double total = 0.0;
    for (std::size_t s = 0; s < data.size(); ++s) {
        Vector x(data.inputs.row(s), data.inputs.row(s) + data.input_dim());
        const Vector y0 = naive_forward(net, x);
        const Vector y1 = naive_forward(surgery, x);
        double acc = 0.0;
        for (std::size_t k = 0; k < y0.size(); ++k) {
            const double d = y0[k] - y1[k];
            acc += d * d;
        }
        total += acc;
    }
    return total / static_cast<double>(data.size());
}

} // namespace ecprune
