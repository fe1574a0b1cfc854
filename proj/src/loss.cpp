#include "ecprune/loss.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "ecprune/threading.hpp"

namespace ecprune {

std::string loss_name(LossKind kind) {
    return kind == LossKind::SoftmaxCrossEntropy ? "softmax_cross_entropy" : "mse";
}

LossKind loss_from_name(const std::string& name) {
    if (name == "softmax_cross_entropy" || name == "cross_entropy")
        return LossKind::SoftmaxCrossEntropy;
    if (name == "mse" || name == "mean_squared_error") return LossKind::MeanSquaredError;
    throw std::invalid_argument("unknown loss: " + name);
}

void check_loss_compatible(LossKind kind, const Dataset& data) {
    if (kind == LossKind::SoftmaxCrossEntropy && data.task != TaskKind::Classification)
        throw std::invalid_argument("softmax cross-entropy requires a classification dataset");
    if (kind == LossKind::MeanSquaredError && data.task != TaskKind::Regression)
        throw std::invalid_argument("mean squared error requires a regression dataset");
}

double sample_loss(const Vector& y, const Dataset& data, std::size_t idx, LossKind kind) {
    if (kind == LossKind::MeanSquaredError) {
        const double* t = data.targets.row(idx);
        double acc = 0.0;
        for (std::size_t k = 0; k < y.size(); ++k) {
            const double d = y[k] - t[k];
            acc += d * d;
        }
        return acc / static_cast<double>(y.size());
    }
    // log-sum-exp stabilized cross-entropy on raw outputs
    const double ymax = *std::max_element(y.begin(), y.end());
    double sum = 0.0;
    for (double v : y) sum += std::exp(v - ymax);
    const std::int32_t c = data.labels[idx];
    return ymax + std::log(sum) - y[static_cast<std::size_t>(c)];
}

double sample_loss_grad(const Vector& y, const Dataset& data, std::size_t idx, LossKind kind,
                        Vector& dldy) {
    dldy.resize(y.size());
    if (kind == LossKind::MeanSquaredError) {
        const double* t = data.targets.row(idx);
        const double inv = 1.0 / static_cast<double>(y.size());
        double acc = 0.0;
        for (std::size_t k = 0; k < y.size(); ++k) {
            const double d = y[k] - t[k];
            acc += d * d;
            dldy[k] = 2.0 * d * inv;
        }
        return acc * inv;
    }
    const double ymax = *std::max_element(y.begin(), y.end());
    double sum = 0.0;
    for (std::size_t k = 0; k < y.size(); ++k) {
        dldy[k] = std::exp(y[k] - ymax);
        sum += dldy[k];
    }
    const std::int32_t c = data.labels[idx];
    for (double& v : dldy) v /= sum;
    dldy[static_cast<std::size_t>(c)] -= 1.0;
    return ymax + std::log(sum) - y[static_cast<std::size_t>(c)];
}

double dataset_loss_serial(const Network& net, const MaskSet* mask, const Dataset& data,
                           LossKind kind) {
    check_loss_compatible(kind, data);
    if (data.size() == 0) throw std::invalid_argument("empty dataset");
    ForwardTrace trace;
    Vector x(data.input_dim());
    double acc = 0.0;
    for (std::size_t s = 0; s < data.size(); ++s) {
        const double* row = data.inputs.row(s);
        x.assign(row, row + data.input_dim());
        forward_into(net, mask, x, trace);
        acc += sample_loss(trace.output(), data, s, kind);
    }
    return acc / static_cast<double>(data.size());
}

double dataset_loss_parallel(const Network& net, const MaskSet* mask, const Dataset& data,
                             LossKind kind, int jobs) {
    check_loss_compatible(kind, data);
    if (data.size() == 0) throw std::invalid_argument("empty dataset");
    const std::size_t n = data.size();
    std::vector<double> partial(static_cast<std::size_t>(jobs), 0.0);
#pragma omp parallel num_threads(jobs)
    {
        ForwardTrace trace;
        Vector x(data.input_dim());
        double local = 0.0;
#pragma omp for schedule(static)
        for (std::ptrdiff_t s = 0; s < static_cast<std::ptrdiff_t>(n); ++s) {
            const double* row = data.inputs.row(static_cast<std::size_t>(s));
            x.assign(row, row + data.input_dim());
            forward_into(net, mask, x, trace);
            local += sample_loss(trace.output(), data, static_cast<std::size_t>(s), kind);
        }
#ifdef _OPENMP
        partial[static_cast<std::size_t>(omp_get_thread_num())] = local;
#else
        partial[0] = local;
#endif
    }
    double acc = 0.0;
    for (double p : partial) acc += p;
    return acc / static_cast<double>(n);
}

double dataset_loss(const Network& net, const MaskSet* mask, const Dataset& data, LossKind kind) {
    const int jobs = max_jobs();
    if (jobs <= 1) return dataset_loss_serial(net, mask, data, kind);
    return dataset_loss_parallel(net, mask, data, kind, jobs);
}

} // namespace ecprune
