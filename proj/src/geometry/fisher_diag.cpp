#include "tracer/geometry/fisher_diag.hpp"

#include "tracer/autodiff/differentiate.hpp"

namespace tracer::geometry {

Vector empirical_fisher_diag(const Model& model, const ParamVector& w, const DataBatch& batch, FisherMode mode,
                             parallel::Exec exec) {
    require(batch.size() >= 1, "empirical_fisher_diag: empty batch");
    if (mode == FisherMode::GradientMagnitude) {
        return gradient(model, w, batch).array().square().matrix();
    }
    const auto p = static_cast<Eigen::Index>(model.num_params());
    const Vector total = parallel::blocked_vector_sum(
        batch.size(), p,
        [&](std::size_t i) -> Vector {
            return gradient(model, w, batch.slice(i, i + 1)).array().square().matrix();
        },
        exec, 64);
    return total / static_cast<double>(batch.size());
}

}  // namespace tracer::geometry
