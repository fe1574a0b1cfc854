#include "ecprune/train.hpp"

#include <numeric>
#include <stdexcept>

#include "ecprune/rng.hpp"

namespace ecprune {

namespace {

void apply_mask_to_weights(Network& net, const MaskSet& mask) {
    for (std::size_t l = 0; l < net.depth(); ++l) {
        auto& w = net.layers[l].weights.data;
        const auto& keep = mask.layers[l].keep;
        for (std::size_t i = 0; i < w.size(); ++i)
            if (!keep[i]) w[i] = 0.0;
    }
}

} // namespace

TrainResult train(const Network& net, const MaskSet* mask, const Dataset& data,
                  const TrainConfig& cfg, LossKind kind) {
    cfg.validate();
    check_loss_compatible(kind, data);
    data.validate();

    TrainResult result{net, {}};
    if (mask) apply_mask_to_weights(result.net, *mask);
    if (cfg.epochs == 0) return result;

    OptimizerState state = make_optimizer_state(result.net);
    std::vector<std::size_t> order(data.size());
    std::iota(order.begin(), order.end(), std::size_t{0});

    const std::size_t bs = static_cast<std::size_t>(cfg.batch_size);
    result.loss_history.reserve(static_cast<std::size_t>(cfg.epochs));

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        auto gen = make_engine(mix_seed(cfg.seed, static_cast<std::uint64_t>(epoch)));
        shuffle(order, gen);

        double epoch_loss = 0.0;
        for (std::size_t start = 0; start < order.size(); start += bs) {
            const std::size_t len = std::min(bs, order.size() - start);
            std::span<const std::size_t> batch(order.data() + start, len);
            BatchGradient bg = loss_gradient(result.net, mask, data, batch, kind);
            adam_step(state, result.net, bg.grads, cfg);
            if (mask) apply_mask_to_weights(result.net, *mask);
            epoch_loss += bg.mean_loss * static_cast<double>(len);
        }
        result.loss_history.push_back(epoch_loss / static_cast<double>(order.size()));
    }
    return result;
}

} // namespace ecprune
