#pragma once

#include "tracer/core/types.hpp"

namespace tracer::vi {

/// q(w) = N(mean, precision^{-1}).
struct GaussianVariational {
    Vector mean;
    Matrix precision;

    Eigen::Index dim() const { return mean.size(); }
    Matrix covariance() const;
    double log_det_precision() const;
    /// Throws unless shapes agree, the precision is symmetric to 1e-12 and
    /// positive-definite.
    void validate() const;
};

/// KL[q || r] between Gaussians in closed form.
double kl_divergence(const GaussianVariational& q, const GaussianVariational& r);

/// Differential entropy 0.5 * (p ln(2 pi e) - ln det precision).
double entropy(const GaussianVariational& q);

/// Analytic Fisher information of N(mean, precision^{-1}) in the
/// (mean, vec(precision)) coordinates; the blocks are decoupled:
///   mean block      = precision (= Sigma^{-1})
///   precision block = 0.5 * Sigma (x) Sigma      (p^2 x p^2, column-major vec)
struct FisherBlocks {
    Matrix mean_block;
    Matrix precision_block;
};

FisherBlocks gaussian_fim(const GaussianVariational& q);

}  // namespace tracer::vi
