#pragma once

#include "tracer/models/model.hpp"
#include "tracer/parallel/kernels.hpp"

namespace tracer::geometry {

enum class FisherMode {
    /// (grad of the mean batch loss)^2, the square of summed gradients.
    GradientMagnitude,
    /// Mean over examples of the squared per-example gradients.
    PerExample,
};

Vector empirical_fisher_diag(const Model& model, const ParamVector& w, const DataBatch& batch,
                             FisherMode mode = FisherMode::GradientMagnitude,
                             parallel::Exec exec = parallel::Exec::OpenMP);

}  // namespace tracer::geometry
