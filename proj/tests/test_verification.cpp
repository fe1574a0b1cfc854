#include <cmath>

#include "doctest.h"

#include "ecprune/scores.hpp"
#include "ecprune/verification.hpp"
#include "testdata.hpp"

using namespace ecprune;

TEST_CASE("naive_forward: hand-checked affine case") {
    Network net = make_mlp({2, 1}, ActKind::Identity, 0);
    net.layers[0].weights(0, 0) = 1.0;
    net.layers[0].weights(0, 1) = 2.0;
    net.layers[0].bias[0] = -1.0;
    const auto y = naive_forward(net, {3.0, 4.0});
    CHECK(y[0] == 10.0);
}

TEST_CASE("fd_output_jacobian: identity layer bias derivatives are Kronecker deltas") {
    const Network net = make_mlp({2, 3}, ActKind::Identity, 4);
    const auto fd = fd_output_jacobian(net, {0.3, -0.6}, FdTarget::Biases);
    for (std::size_t k = 0; k < 3; ++k)
        for (std::size_t i = 0; i < 3; ++i)
            CHECK(std::abs(fd[k].biases[0][i] - (i == k ? 1.0 : 0.0)) < 1e-9);
}

TEST_CASE("fd_output_jacobian: slope derivatives match the analytic PReLU rule") {
    // One PReLU unit pushed onto its negative branch: y = slope * a, so
    // dy/dslope = a.
    Network net = make_mlp({1, 1, 1}, ActKind::PReLU, 2);
    net.layers[0].weights(0, 0) = 1.0;
    net.layers[0].bias[0] = 0.0;
    net.layers[1].weights(0, 0) = 1.0;
    const double a = -0.8;
    const auto fd = fd_output_jacobian(net, {a}, FdTarget::Slopes);
    CHECK(std::abs(fd[0].slopes[0] - a) < 1e-8);
}

TEST_CASE("fd_output_jacobian: the parameter-count guard trips") {
    const Network net = make_mlp({200, 60, 10}, ActKind::PReLU, 1); // > 10^4 params
    CHECK_THROWS((void)fd_output_jacobian(net, Vector(200, 0.1), FdTarget::Weights));
}

TEST_CASE("fd_loss_gradient: matches the analytic gradient of a scalar quadratic") {
    // L = (w * x - t)^2 on one sample, dL/dw = 2 (w x - t) x.
    Network net = make_mlp({1, 1}, ActKind::Identity, 0);
    net.layers[0].weights(0, 0) = 1.5;
    net.layers[0].bias[0] = 0.0;
    Matrix in(1, 1), tg(1, 1);
    in(0, 0) = 2.0;
    tg(0, 0) = 1.0;
    const Dataset data = make_regression_dataset(std::move(in), std::move(tg), "one");
    const auto fd = fd_loss_gradient(net, data, LossKind::MeanSquaredError);
    const double want = 2.0 * (1.5 * 2.0 - 1.0) * 2.0;
    CHECK(std::abs(fd.weights[0](0, 0) - want) < 1e-7);
    CHECK(std::abs(fd.biases[0][0] - 2.0 * (1.5 * 2.0 - 1.0)) < 1e-7);
}

TEST_CASE("brute_discrepancy: exact cancellation on one sample, last layer") {
    const Network net = testdata::random_net({3, 4, 2}, 5);
    const Dataset data = testdata::random_regression(1, 3, 2, 5);
    const Vector x(data.inputs.row(0), data.inputs.row(0) + 3);
    const auto trace = forward(net, x);
    const std::size_t L = net.depth() - 1;
    // Remove last-layer weight (0, 1); its signal is fully restored by the
    // matching bias shift, so the output is unchanged on this sample.
    const double db = signal(net, trace, L, 0, 1);
    CHECK(brute_discrepancy(net, data, L, 0, 1, db) < 1e-28);
}

TEST_CASE("brute_discrepancy: delta_b = 0 equals the masked-forward discrepancy") {
    const Network net = testdata::random_net({3, 5, 2}, 9);
    const Dataset data = testdata::random_regression(8, 3, 2, 9);
    MaskSet mask = ones_mask(net);
    const std::size_t l = 1, i = 1, j = 2;
    mask.layers[l].keep[i * net.layers[l].weights.cols + j] = 0;

    double want = 0.0;
    for (std::size_t s = 0; s < data.size(); ++s) {
        const Vector x(data.inputs.row(s), data.inputs.row(s) + 3);
        const auto a = forward(net, x).output();
        const auto b = masked_forward(net, mask, x).output();
        for (std::size_t k = 0; k < a.size(); ++k) want += (a[k] - b[k]) * (a[k] - b[k]);
    }
    want /= double(data.size());
    CHECK(testdata::rel_err(brute_discrepancy(net, data, l, i, j, 0.0), want) < 1e-12);
}

TEST_CASE("brute_discrepancy: grid minimum sits next to the closed-form optimum") {
    // Affine net, so the linearized optimum is the true optimum.
    Network net = make_mlp({2, 3, 1}, ActKind::Identity, 13);
    const Dataset data = testdata::random_regression(12, 2, 1, 13);
    const auto ec = ec_scores(net, data, PruneConfig{});
    const std::size_t l = 0, i = 1, j = 0;
    const double opt = ec.compensation.layers[l](i, j);

    const double step = std::max(1e-3, std::abs(opt) / 64.0);
    double best_db = opt - 40 * step, best = 1e300;
    for (int g = -40; g <= 40; ++g) {
        const double db = opt + g * step;
        const double val = brute_discrepancy(net, data, l, i, j, db);
        if (val < best) {
            best = val;
            best_db = db;
        }
    }
    CHECK(std::abs(best_db - opt) <= step);
}

TEST_CASE("naive_dataset_loss: disagrees when the network genuinely changes") {
    // Guards against both loss paths silently evaluating the same thing.
    const Network net = testdata::random_net({3, 4, 2}, 31);
    Network other = net;
    other.layers[0].weights(0, 0) += 0.5;
    const Dataset data = testdata::random_regression(10, 3, 2, 31);
    CHECK(naive_dataset_loss(net, data, LossKind::MeanSquaredError) !=
          naive_dataset_loss(other, data, LossKind::MeanSquaredError));
}
