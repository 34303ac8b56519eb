#pragma once

#include "tracer/core/types.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace tracer {

/// n examples with d_x features each. Classification batches carry integer
/// labels in [0, num_classes); regression batches carry real targets and
/// num_classes == 0.
struct DataBatch {
    Matrix inputs;
    std::vector<int> labels;
    Vector targets;
    int num_classes = 0;

    std::size_t size() const { return static_cast<std::size_t>(inputs.rows()); }
    Eigen::Index features() const { return inputs.cols(); }
    bool is_classification() const { return num_classes > 0; }

    /// Gathers the listed rows, preserving order.
    DataBatch select(std::span<const std::size_t> rows) const;
    /// Rows [begin, end).
    DataBatch slice(std::size_t begin, std::size_t end) const;

    /// Throws unless shapes agree and every label is in range.
    void validate() const;
};

/// Concatenates batches with identical feature count and task type.
DataBatch concatenate(const DataBatch& a, const DataBatch& b);

}  // namespace tracer
