#include "ecprune/dataset.hpp"

#include <cmath>
#include <stdexcept>

namespace ecprune {

void Dataset::validate() const {
    if (inputs.rows == 0) throw std::invalid_argument("dataset has no samples");
    for (double v : inputs.data)
        if (!std::isfinite(v)) throw std::invalid_argument("dataset has a non-finite input");
    if (task == TaskKind::Classification) {
        if (num_classes <= 0) throw std::invalid_argument("classification needs num_classes > 0");
        if (labels.size() != inputs.rows)
            throw std::invalid_argument("label count does not match sample count");
        for (std::int32_t c : labels)
            if (c < 0 || c >= num_classes)
                throw std::invalid_argument("class index out of range");
    } else {
        if (targets.rows != inputs.rows)
            throw std::invalid_argument("target count does not match sample count");
        if (targets.cols == 0) throw std::invalid_argument("regression targets are empty");
        for (double v : targets.data)
            if (!std::isfinite(v)) throw std::invalid_argument("dataset has a non-finite target");
    }
}

Dataset make_regression_dataset(Matrix inputs, Matrix targets, std::string name) {
    Dataset d;
    d.inputs = std::move(inputs);
    d.targets = std::move(targets);
    d.task = TaskKind::Regression;
    d.name = std::move(name);
    d.validate();
    return d;
}

Dataset make_classification_dataset(Matrix inputs, std::vector<std::int32_t> labels,
                                    int num_classes, std::string name) {
    Dataset d;
    d.inputs = std::move(inputs);
    d.labels = std::move(labels);
    d.task = TaskKind::Classification;
    d.num_classes = num_classes;
    d.name = std::move(name);
    d.validate();
    return d;
}

} // namespace ecprune
