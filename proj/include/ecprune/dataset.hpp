#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ecprune/matrix.hpp"

namespace ecprune {

enum class TaskKind { Classification, Regression };

// Immutable sample collection. Regression targets live in `targets`
// (N x n_out); classification targets are class indices in `labels`.
struct Dataset {
    Matrix inputs; // N x n_in
    Matrix targets;
    std::vector<std::int32_t> labels;
    TaskKind task = TaskKind::Regression;
    int num_classes = 0;
    std::string name;

    std::size_t size() const { return inputs.rows; }
    std::size_t input_dim() const { return inputs.cols; }
    std::size_t output_dim() const {
        return task == TaskKind::Classification ? static_cast<std::size_t>(num_classes)
                                                : targets.cols;
    }

    void validate() const;
};

Dataset make_regression_dataset(Matrix inputs, Matrix targets, std::string name);
Dataset make_classification_dataset(Matrix inputs, std::vector<std::int32_t> labels,
                                    int num_classes, std::string name);

} // namespace ecprune
