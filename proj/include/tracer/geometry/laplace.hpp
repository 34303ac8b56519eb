#pragma once

#include "tracer/geometry/hutchinson.hpp"

#include <span>
#include <vector>

namespace tracer::geometry {

/// Laplace approximation at a mode under a flat prior:
///   log Z = -loss + (p/2) ln(2 pi) - 0.5 log det H.
struct LaplaceSummary {
    ParamVector mode;
    double loss_at_mode = 0.0;
    double log_det_hessian = 0.0;
    std::size_t dim = 0;
    double log_evidence = 0.0;
};

struct LaplaceOptions {
    double gradient_tolerance = 1e-6;
    double min_eigenvalue = 1e-10;
    Eigen::Index max_dim = 100;
};

double laplace_log_evidence_value(double loss_at_mode, double log_det_hessian, std::size_t dim);

LaplaceSummary make_laplace_summary(ParamVector mode, double loss_at_mode, double log_det_hessian, std::size_t dim);

/// Column-by-column Hessian from dim products H e_i, symmetrized.
Matrix assemble_hessian(const HvpOracle& hvp, Eigen::Index dim);

/// Sum of log eigenvalues of a symmetric matrix. Throws "not a strict local
/// minimum" when any eigenvalue is <= min_eigenvalue.
double log_det_positive_definite(const Matrix& h, double min_eigenvalue = 1e-10);

/// Explicit-Hessian Laplace summary. Requires ||g|| <= gradient_tolerance and
/// dim <= max_dim (larger models only support trace diagnostics).
LaplaceSummary laplace_log_evidence(const ParamVector& mode, double loss_at_mode, double gradient_norm,
                                    const HvpOracle& hvp, const LaplaceOptions& options = {});

/// pi_k = Z_k / sum Z_k', computed in log space.
struct MixtureWeights {
    Vector weights;
};

MixtureWeights mixture_weights(std::span<const LaplaceSummary> summaries);
MixtureWeights mixture_weights_from_log_evidence(std::span<const double> log_evidence);

/// (1 + eps)^p, the covariance-volume ratio of an eps-flattened minimum.
double curvature_dominance_ratio(double eps, std::size_t p);

/// Z' / Z = (1 - eps)^{-p/2} for H' = (1 - eps) H.
double flattened_evidence_ratio(double eps, std::size_t p);

}  // namespace tracer::geometry
