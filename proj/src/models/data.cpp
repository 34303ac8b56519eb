#include "tracer/models/data.hpp"

#include <numeric>
#include <string>

namespace tracer {

DataBatch DataBatch::select(std::span<const std::size_t> rows) const {
    DataBatch out;
    out.num_classes = num_classes;
    out.inputs.resize(static_cast<Eigen::Index>(rows.size()), inputs.cols());
    if (is_classification()) {
        out.labels.reserve(rows.size());
    } else {
        out.targets.resize(static_cast<Eigen::Index>(rows.size()));
    }
    for (std::size_t k = 0; k < rows.size(); ++k) {
        const auto r = static_cast<Eigen::Index>(rows[k]);
        require(rows[k] < size(), "row index out of range");
        out.inputs.row(static_cast<Eigen::Index>(k)) = inputs.row(r);
        if (is_classification()) {
            out.labels.push_back(labels[rows[k]]);
        } else {
            out.targets(static_cast<Eigen::Index>(k)) = targets(r);
        }
    }
    return out;
}

DataBatch DataBatch::slice(std::size_t begin, std::size_t end) const {
    require(begin <= end && end <= size(), "slice out of range");
    std::vector<std::size_t> rows(end - begin);
    std::iota(rows.begin(), rows.end(), begin);
    return select(rows);
}

void DataBatch::validate() const {
    require(inputs.rows() >= 1, "batch must contain at least one example");
    if (is_classification()) {
        require(labels.size() == size(), "label count does not match inputs");
        for (int y : labels) {
            if (y < 0 || y >= num_classes) {
                throw TracerError("label " + std::to_string(y) + " out of range for " +
                                  std::to_string(num_classes) + " classes");
            }
        }
    } else {
        require(targets.size() == inputs.rows(), "target count does not match inputs");
    }
}

DataBatch concatenate(const DataBatch& a, const DataBatch& b) {
    require(a.features() == b.features() && a.num_classes == b.num_classes,
            "cannot concatenate incompatible batches");
    DataBatch out;
    out.num_classes = a.num_classes;
    out.inputs.resize(a.inputs.rows() + b.inputs.rows(), a.features());
    out.inputs << a.inputs, b.inputs;
    if (a.is_classification()) {
        out.labels = a.labels;
        out.labels.insert(out.labels.end(), b.labels.begin(), b.labels.end());
    } else {
        out.targets.resize(a.targets.size() + b.targets.size());
        out.targets << a.targets, b.targets;
    }
    return out;
}

}  // namespace tracer
