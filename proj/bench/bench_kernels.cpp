// Serial reference vs. OpenMP kernels on a mid-size regression problem.
// Usage: bench_kernels [jobs] [samples]

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <thread>
#include <vector>

#include "ecprune/data_io.hpp"
#include "ecprune/gradient.hpp"
#include "ecprune/loss.hpp"
#include "ecprune/network.hpp"
#include "ecprune/scores.hpp"

using namespace ecprune;
using Clock = std::chrono::steady_clock;

namespace {

template <typename F>
double time_ms(F&& f, int reps) {
    f(); // warm-up
    const auto t0 = Clock::now();
    for (int i = 0; i < reps; ++i) f();
    const auto t1 = Clock::now();
    return std::chrono::duration<double, std::milli>(t1 - t0).count() / reps;
}

void report(const char* name, double serial_ms, double parallel_ms, int jobs) {
    std::printf("%-22s serial %9.2f ms   %d jobs %9.2f ms   speedup %5.2fx\n", name, serial_ms,
                jobs, parallel_ms, serial_ms / parallel_ms);
}

} // namespace

int main(int argc, char** argv) {
    const int jobs = argc > 1 ? std::atoi(argv[1])
                              : std::max(1u, std::thread::hardware_concurrency());
    const std::size_t samples = argc > 2 ? std::strtoull(argv[2], nullptr, 10) : 2000;

    const Dataset data = synth_regression(SynthKind::DiffusionProfile, samples, 42);
    const Network net = make_mlp({68, 64, 32, 32, 16, 16, 1}, ActKind::PReLU, 7);
    const LossKind kind = LossKind::MeanSquaredError;
    std::vector<std::size_t> batch(data.size());
    for (std::size_t i = 0; i < batch.size(); ++i) batch[i] = i;

    PruneConfig cfg;
    cfg.expectation_subset = 0;

    std::printf("net %zu weights, %zu samples, %d jobs\n\n", net.weight_count(), data.size(),
                jobs);

    report("dataset_loss",
           time_ms([&] { dataset_loss_serial(net, nullptr, data, kind); }, 5),
           time_ms([&] { dataset_loss_parallel(net, nullptr, data, kind, jobs); }, 5), jobs);

    report("loss_gradient",
           time_ms([&] { loss_gradient_serial(net, nullptr, data, batch, kind); }, 5),
           time_ms([&] { loss_gradient_parallel(net, nullptr, data, batch, kind, jobs); }, 5),
           jobs);

    report("ec_scores",
           time_ms([&] { ec_scores_serial(net, data, cfg); }, 3),
           time_ms([&] { ec_scores_parallel(net, data, cfg, jobs); }, 3), jobs);

    // One pass is plenty: this kernel re-evaluates the net once per weight.
    const Dataset small = synth_regression(SynthKind::DiffusionProfile, 200, 43);
    report("nonlinear_scores",
           time_ms([&] { nonlinear_scores_serial(net, small, cfg); }, 1),
           time_ms([&] { nonlinear_scores_parallel(net, small, cfg, jobs); }, 1), jobs);

    return 0;
}
