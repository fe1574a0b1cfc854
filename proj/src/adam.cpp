#include "ecprune/adam.hpp"

#include <cmath>
#include <stdexcept>

namespace ecprune {

void TrainConfig::validate() const {
    if (epochs < 0) throw std::invalid_argument("epochs must be >= 0");
    if (batch_size < 1) throw std::invalid_argument("batch_size must be >= 1");
    if (beta1 < 0.0 || beta1 >= 1.0 || beta2 < 0.0 || beta2 >= 1.0)
        throw std::invalid_argument("beta1/beta2 must be in [0, 1)");
    if (!(learning_rate > 0.0)) throw std::invalid_argument("learning_rate must be > 0");
    if (!(epsilon_adam > 0.0)) throw std::invalid_argument("epsilon_adam must be > 0");
}

OptimizerState make_optimizer_state(const Network& net) {
    return OptimizerState{zeros_like(net), zeros_like(net), 0};
}

namespace {

inline void update_one(double& p, double& m, double& v, double g, double lr, double b1, double b2,
                       double eps, double bc1, double bc2) {
    if (!std::isfinite(g)) throw std::runtime_error("non-finite gradient in adam_step");
    m = b1 * m + (1.0 - b1) * g;
    v = b2 * v + (1.0 - b2) * g * g;
    if (m == 0.0 && v == 0.0) return; // untouched parameter (e.g. pruned weight)
    const double m_hat = m / bc1;
    const double v_hat = v / bc2;
    p -= lr * m_hat / (std::sqrt(v_hat) + eps);
}

} // namespace

void adam_step(OptimizerState& state, Network& net, const ParamSet& grads,
               const TrainConfig& cfg) {
    cfg.validate();
    if (grads.weights.size() != net.depth())
        throw std::invalid_argument("gradient shape does not match network");

    state.step += 1;
    const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.step));
    const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.step));

    for (std::size_t l = 0; l < net.depth(); ++l) {
        Layer& layer = net.layers[l];
        const Matrix& gw = grads.weights[l];
        if (!gw.same_shape(layer.weights))
            throw std::invalid_argument("gradient shape does not match network");
        for (std::size_t i = 0; i < layer.weights.data.size(); ++i)
            update_one(layer.weights.data[i], state.m.weights[l].data[i],
                       state.v.weights[l].data[i], gw.data[i], cfg.learning_rate, cfg.beta1,
                       cfg.beta2, cfg.epsilon_adam, bc1, bc2);
        for (std::size_t i = 0; i < layer.bias.size(); ++i)
            update_one(layer.bias[i], state.m.biases[l][i], state.v.biases[l][i],
                       grads.biases[l][i], cfg.learning_rate, cfg.beta1, cfg.beta2,
                       cfg.epsilon_adam, bc1, bc2);
        if (act_has_slope(layer.activation.kind))
            update_one(layer.activation.slope, state.m.slopes[l], state.v.slopes[l],
                       grads.slopes[l], cfg.learning_rate, cfg.beta1, cfg.beta2, cfg.epsilon_adam,
                       bc1, bc2);
    }
}

} // namespace ecprune
