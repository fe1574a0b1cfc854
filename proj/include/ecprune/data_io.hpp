#pragma once

#include <cstdint>
#include <string>

#include "ecprune/dataset.hpp"

namespace ecprune {

// MNIST-style IDX pair: big-endian headers, magic 2051 (images) and 2049
// (labels). Pixels are scaled to [0, 1]; labels become class indices.
Dataset load_mnist(const std::string& images_path, const std::string& labels_path);

// CSV with one header row. Columns whose names start with "target" are the
// regression targets (at least one required); every other column is an
// input feature. Row order is preserved.
Dataset load_tabular(const std::string& path);

// Writes a regression dataset in the layout load_tabular expects.
void save_tabular(const Dataset& data, const std::string& path);

enum class SynthKind { DiffusionProfile };

// Deterministic synthetic regression set shaped like the PDE surrogate
// task: inputs (mu, t, x, 65-point initial profile), scalar target in
// [0, 1].
Dataset synth_regression(SynthKind kind, std::size_t n, std::uint64_t seed);

struct NoiseSpec {
    double amplitude = 0.0; // targets receive i.i.d. U(-a, a)
    std::uint64_t seed = 0;
};

// Returns a copy with perturbed targets; regression only.
Dataset add_noise(const Dataset& data, const NoiseSpec& spec);

struct SplitResult {
    Dataset train;
    Dataset test;
};

// Seeded shuffle split into floor(f*N) train and N - floor(f*N) test
// samples. An empty test set is an error unless explicitly allowed.
SplitResult split(const Dataset& data, double train_fraction, std::uint64_t seed,
                  bool allow_empty_test = false);

// Extracts the samples at the given row indices.
Dataset take_rows(const Dataset& data, const std::vector<std::size_t>& rows, std::string name);

} // namespace ecprune
