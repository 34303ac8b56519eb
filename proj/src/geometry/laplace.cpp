#include "tracer/geometry/laplace.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace tracer::geometry {

double laplace_log_evidence_value(double loss_at_mode, double log_det_hessian, std::size_t dim) {
    return -loss_at_mode + 0.5 * static_cast<double>(dim) * std::log(2.0 * std::numbers::pi) -
           0.5 * log_det_hessian;
}

LaplaceSummary make_laplace_summary(ParamVector mode, double loss_at_mode, double log_det_hessian, std::size_t dim) {
    LaplaceSummary s;
    s.mode = std::move(mode);
    s.loss_at_mode = loss_at_mode;
    s.log_det_hessian = log_det_hessian;
    s.dim = dim;
    s.log_evidence = laplace_log_evidence_value(loss_at_mode, log_det_hessian, dim);
    return s;
}

Matrix assemble_hessian(const HvpOracle& hvp, Eigen::Index dim) {
    Matrix h(dim, dim);
    for (Eigen::Index i = 0; i < dim; ++i) {
        h.col(i) = hvp(Vector::Unit(dim, i));
    }
    return 0.5 * (h + h.transpose());
}

double log_det_positive_definite(const Matrix& h, double min_eigenvalue) {
    Eigen::SelfAdjointEigenSolver<Matrix> eig(h, Eigen::EigenvaluesOnly);
    require(eig.info() == Eigen::Success, "eigen-decomposition failed");
    const Vector& lambda = eig.eigenvalues();
    if (lambda.minCoeff() <= min_eigenvalue) throw TracerError("not a strict local minimum");
    return lambda.array().log().sum();
}

LaplaceSummary laplace_log_evidence(const ParamVector& mode, double loss_at_mode, double gradient_norm,
                                    const HvpOracle& hvp, const LaplaceOptions& options) {
    const Eigen::Index dim = mode.size();
    require(dim >= 1, "laplace: empty parameter vector");
    if (dim > options.max_dim) {
        throw TracerError("laplace: explicit Hessian limited to p <= " + std::to_string(options.max_dim));
    }
    if (!(gradient_norm <= options.gradient_tolerance)) {
        throw TracerError("laplace: mode not located (gradient norm " + std::to_string(gradient_norm) + ")");
    }
    const Matrix h = assemble_hessian(hvp, dim);
    const double log_det = log_det_positive_definite(h, options.min_eigenvalue);
    return make_laplace_summary(mode, loss_at_mode, log_det, static_cast<std::size_t>(dim));
}

MixtureWeights mixture_weights_from_log_evidence(std::span<const double> log_evidence) {
    require(!log_evidence.empty(), "mixture_weights: need at least one mode");
    const Eigen::Map<const Vector> log_z(log_evidence.data(), static_cast<Eigen::Index>(log_evidence.size()));
    require(log_z.allFinite(), "mixture_weights: non-finite log evidence");
    const double top = log_z.maxCoeff();
    Vector w = (log_z.array() - top).exp().matrix();
    w /= w.sum();
    return {std::move(w)};
}

MixtureWeights mixture_weights(std::span<const LaplaceSummary> summaries) {
    std::vector<double> log_z;
    log_z.reserve(summaries.size());
    for (const auto& s : summaries) log_z.push_back(s.log_evidence);
    return mixture_weights_from_log_evidence(log_z);
}

double curvature_dominance_ratio(double eps, std::size_t p) {
    require(eps >= 0.0 && eps < 1.0, "curvature_dominance_ratio: eps must lie in [0, 1)");
    return std::exp(static_cast<double>(p) * std::log1p(eps));
}

double flattened_evidence_ratio(double eps, std::size_t p) {
    require(eps >= 0.0 && eps < 1.0, "flattened_evidence_ratio: eps must lie in [0, 1)");
    return std::exp(-0.5 * static_cast<double>(p) * std::log1p(-eps));
}

}  // namespace tracer::geometry
