#pragma once

// Literal per-weight elimination-compensation oracle built on the
// finite-difference jacobians. Deliberately ignores the moment-accumulator
// shortcut: u_k = dy_k/dW_ij * W_ij and v_k = dy_k/db_i are measured per
// sample, and the quadratic objective J(db) = sum_k E[(u_k - v_k db)^2]
// is minimized directly. Slow, but an independent check of the closed form.

#include <cstddef>
#include <vector>

#include "ecprune/dataset.hpp"
#include "ecprune/network.hpp"
#include "ecprune/verification.hpp"

namespace testdata {

struct FdSampleJac {
    std::vector<ecprune::ParamSet> w; // [k] -> dy_k/dW
    std::vector<ecprune::ParamSet> b; // [k] -> dy_k/db
};

inline std::vector<FdSampleJac> fd_sample_jacobians(const ecprune::Network& net,
                                                    const ecprune::Dataset& data) {
    std::vector<FdSampleJac> out;
    out.reserve(data.size());
    for (std::size_t s = 0; s < data.size(); ++s) {
        ecprune::Vector x(data.inputs.row(s), data.inputs.row(s) + data.inputs.cols);
        FdSampleJac jac;
        jac.w = ecprune::fd_output_jacobian(net, x, ecprune::FdTarget::Weights);
        jac.b = ecprune::fd_output_jacobian(net, x, ecprune::FdTarget::Biases);
        out.push_back(std::move(jac));
    }
    return out;
}

// J(db) evaluated from precomputed jacobians.
inline double linearized_objective(const ecprune::Network& net,
                                   const std::vector<FdSampleJac>& jacs, std::size_t l,
                                   std::size_t i, std::size_t j, double db) {
    const double w_ij = net.layers[l].weights(i, j);
    double total = 0.0;
    for (const FdSampleJac& jac : jacs) {
        for (std::size_t k = 0; k < jac.w.size(); ++k) {
            const double u = jac.w[k].weights[l](i, j) * w_ij;
            const double v = jac.b[k].biases[l][i];
            const double d = u - v * db;
            total += d * d;
        }
    }
    return total / double(jacs.size());
}

struct LiteralEc {
    double compensation = 0.0;
    double importance = 0.0;
};

inline LiteralEc literal_ec(const ecprune::Network& net, const std::vector<FdSampleJac>& jacs,
                            std::size_t l, std::size_t i, std::size_t j,
                            double dead_eps = 1e-12) {
    const double w_ij = net.layers[l].weights(i, j);
    double uu = 0.0, uv = 0.0, vv = 0.0;
    for (const FdSampleJac& jac : jacs) {
        for (std::size_t k = 0; k < jac.w.size(); ++k) {
            const double u = jac.w[k].weights[l](i, j) * w_ij;
            const double v = jac.b[k].biases[l][i];
            uu += u * u;
            uv += u * v;
            vv += v * v;
        }
    }
    const double n = double(jacs.size());
    uu /= n;
    uv /= n;
    vv /= n;
    LiteralEc out;
    if (vv < dead_eps) return out;
    out.compensation = uv / vv;
    out.importance = uu - uv * uv / vv;
    if (out.importance < 0.0) out.importance = 0.0;
    return out;
}

} // namespace testdata
