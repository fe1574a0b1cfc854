#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace ecprune {

// Per-layer binary matrices aligned with the weight matrices: 1 keeps the
// weight, 0 prunes it. Biases and activation slopes are never masked.
struct MaskSet {
    struct LayerMask {
        std::size_t rows = 0;
        std::size_t cols = 0;
        std::vector<std::uint8_t> keep; // row-major, values 0/1

        LayerMask() = default;
        LayerMask(std::size_t r, std::size_t c, std::uint8_t fill = 1)
            : rows(r), cols(c), keep(r * c, fill) {}

        std::uint8_t& operator()(std::size_t i, std::size_t j) { return keep[i * cols + j]; }
        std::uint8_t operator()(std::size_t i, std::size_t j) const { return keep[i * cols + j]; }
    };

    std::vector<LayerMask> layers;

    std::size_t nonzero_count() const {
        std::size_t n = 0;
        for (const auto& m : layers)
            for (std::uint8_t k : m.keep) n += k;
        return n;
    }

    std::size_t entry_count() const {
        std::size_t n = 0;
        for (const auto& m : layers) n += m.keep.size();
        return n;
    }
};

} // namespace ecprune
