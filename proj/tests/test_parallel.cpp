// The OpenMP kernels against their serial reference implementations.
// Outputs may differ only by floating-point reassociation in the parallel
// reductions, so comparisons are tolerance-based (1e-12 relative) except
// where the work decomposes per-weight and stays bit-exact.

#include <cmath>
#include <vector>

#include "doctest.h"

#include "ecprune/data_io.hpp"
#include "ecprune/gradient.hpp"
#include "ecprune/loss.hpp"
#include "ecprune/scores.hpp"
#include "ecprune/threading.hpp"
#include "ecprune/train.hpp"
#include "testdata.hpp"

using namespace ecprune;

namespace {

struct JobsGuard {
    explicit JobsGuard(int jobs) { set_max_jobs(jobs); }
    ~JobsGuard() { set_max_jobs(1); }
};

} // namespace

TEST_CASE("dataset_loss: parallel equals serial within reassociation error") {
    const Network net = testdata::random_net({6, 12, 8, 3}, 1);
    const Dataset data = testdata::random_regression(500, 6, 3, 1);
    const double serial = dataset_loss_serial(net, nullptr, data, LossKind::MeanSquaredError);
    for (int jobs : {2, 3, 8}) {
        const double parallel =
            dataset_loss_parallel(net, nullptr, data, LossKind::MeanSquaredError, jobs);
        CHECK(testdata::rel_err(parallel, serial) < 1e-12);
    }
}

TEST_CASE("dataset_loss: dispatch follows max_jobs") {
    const Network net = testdata::random_net({4, 6, 2}, 2);
    const Dataset data = testdata::random_regression(100, 4, 2, 2);
    const double serial = dataset_loss(net, nullptr, data, LossKind::MeanSquaredError);
    JobsGuard guard(4);
    const double parallel = dataset_loss(net, nullptr, data, LossKind::MeanSquaredError);
    CHECK(testdata::rel_err(parallel, serial) < 1e-12);
}

TEST_CASE("loss_gradient: parallel equals serial within reassociation error") {
    const Network net = testdata::random_net({5, 10, 6, 2}, 3);
    const Dataset data = testdata::random_regression(300, 5, 2, 3);
    std::vector<std::size_t> batch(data.size());
    for (std::size_t i = 0; i < batch.size(); ++i) batch[i] = i;
    const auto serial =
        loss_gradient_serial(net, nullptr, data, batch, LossKind::MeanSquaredError);
    for (int jobs : {2, 5}) {
        const auto parallel =
            loss_gradient_parallel(net, nullptr, data, batch, LossKind::MeanSquaredError, jobs);
        CHECK(testdata::rel_err(parallel.mean_loss, serial.mean_loss) < 1e-12);
        for (std::size_t l = 0; l < net.depth(); ++l) {
            for (std::size_t e = 0; e < serial.grads.weights[l].size(); ++e)
                CHECK(std::abs(parallel.grads.weights[l].data[e] -
                               serial.grads.weights[l].data[e]) < 1e-12);
            for (std::size_t i = 0; i < serial.grads.biases[l].size(); ++i)
                CHECK(std::abs(parallel.grads.biases[l][i] - serial.grads.biases[l][i]) < 1e-12);
            CHECK(std::abs(parallel.grads.slopes[l] - serial.grads.slopes[l]) < 1e-12);
        }
    }
}

TEST_CASE("loss_gradient: masked entries are exactly zero in both paths") {
    const Network net = testdata::random_net({4, 8, 2}, 4);
    MaskSet mask = ones_mask(net);
    mask.layers[0].keep[5] = 0;
    const Dataset data = testdata::random_regression(64, 4, 2, 4);
    std::vector<std::size_t> batch(data.size());
    for (std::size_t i = 0; i < batch.size(); ++i) batch[i] = i;
    CHECK(loss_gradient_serial(net, &mask, data, batch, LossKind::MeanSquaredError)
              .grads.weights[0]
              .data[5] == 0.0);
    CHECK(loss_gradient_parallel(net, &mask, data, batch, LossKind::MeanSquaredError, 4)
              .grads.weights[0]
              .data[5] == 0.0);
}

TEST_CASE("ec_scores: parallel equals serial within reassociation error") {
    const Network net = testdata::random_net({6, 10, 8, 2}, 5);
    const Dataset data = testdata::random_regression(200, 6, 2, 5);
    const auto serial = ec_scores_serial(net, data, PruneConfig{});
    const auto parallel = ec_scores_parallel(net, data, PruneConfig{}, 3);
    for (std::size_t l = 0; l < net.depth(); ++l)
        for (std::size_t e = 0; e < serial.scores.layers[l].size(); ++e) {
            CHECK(std::abs(parallel.scores.layers[l].data[e] - serial.scores.layers[l].data[e]) <
                  1e-12 * std::max(1.0, serial.scores.layers[l].data[e]));
            CHECK(std::abs(parallel.compensation.layers[l].data[e] -
                           serial.compensation.layers[l].data[e]) <
                  1e-12 * std::max(1.0, std::abs(serial.compensation.layers[l].data[e])));
        }
}

TEST_CASE("nonlinear_scores: per-weight decomposition keeps parallel bit-exact") {
    const Network net = testdata::random_net({5, 6, 2}, 6);
    const Dataset data = testdata::random_regression(40, 5, 2, 6);
    const auto serial = nonlinear_scores_serial(net, data, PruneConfig{});
    const auto parallel = nonlinear_scores_parallel(net, data, PruneConfig{}, 4);
    for (std::size_t l = 0; l < net.depth(); ++l) {
        CHECK(parallel.scores.layers[l].data == serial.scores.layers[l].data);
        CHECK(parallel.compensation.layers[l].data == serial.compensation.layers[l].data);
    }
}

TEST_CASE("train: runs under parallel kernels and stays masked") {
    const Network net = testdata::random_net({6, 10, 2}, 7);
    MaskSet mask = ones_mask(net);
    mask.layers[0].keep[7] = 0;
    const Dataset data = testdata::random_regression(256, 6, 2, 7);
    TrainConfig cfg;
    cfg.epochs = 2;
    cfg.batch_size = 64;
    cfg.seed = 1;

    const auto serial = train(net, &mask, data, cfg, LossKind::MeanSquaredError);
    JobsGuard guard(4);
    const auto parallel = train(net, &mask, data, cfg, LossKind::MeanSquaredError);
    CHECK(parallel.net.layers[0].weights.data[7] == 0.0);
    // Parallel reduction reassociates; trajectories agree only approximately.
    for (std::size_t e = 0; e < serial.net.layers[0].weights.size(); ++e)
        CHECK(std::abs(parallel.net.layers[0].weights.data[e] -
                       serial.net.layers[0].weights.data[e]) < 1e-8);
}
