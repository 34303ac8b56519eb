#pragma once

#include "tracer/models/quadratic.hpp"
#include "tracer/parallel/kernels.hpp"
#include "tracer/vi/gaussian.hpp"

#include <cstdint>
#include <limits>

namespace tracer::vi {

/// Natural-gradient VI on E_q[L] + rho KL[q || N(0, eta I)].
struct VIConfig {
    double rho = 1.0;                                         ///< tempering, > 0
    double eta = std::numeric_limits<double>::infinity();    ///< prior variance; infinity = improper prior
    double alpha = 1.0;                                       ///< mean step
    double beta = 0.5;                                        ///< precision step, in [0, 1]

    bool improper_prior() const { return std::isinf(eta); }
    void validate() const;
};

/// Exact Gaussian expectations of a quadratic loss:
///   E[L] = L(mean) + 0.5 Tr(A Sigma),  E[grad L] = A mean - b,  E[hess L] = A.
struct Expectations {
    double expected_loss = 0.0;
    Vector expected_gradient;
    Matrix expected_hessian;
};

Expectations gaussian_expectations_quadratic(const QuadraticModel& model, const GaussianVariational& q);

/// Monte-Carlo estimate of E_q[L] from n samples w = mean + L^{-T} z, where
/// precision = L L^T. Sample k uses its own stream derived from (seed, k).
parallel::Moments monte_carlo_expected_loss(const QuadraticModel& model, const GaussianVariational& q,
                                            std::size_t n, std::uint64_t seed,
                                            parallel::Exec exec = parallel::Exec::OpenMP);

/// KL[q || N(0, eta I)] for finite eta.
double kl_to_prior(const GaussianVariational& q, double eta);

/// E_q[L] + rho KL[q || p]; with an improper prior E_q[L] - rho H(q).
double objective_value(const QuadraticModel& model, const GaussianVariational& q, const VIConfig& cfg);

/// One natural-gradient step:
///   precision <- (1 - beta) precision + beta (A / rho + I / eta)
///   mean      <- mean - alpha precision^{-1} (E[grad L] + (rho / eta) mean)
/// The mean step is preconditioned by the updated precision. Throws
/// "precision left the PD cone" if the new precision is not positive-definite.
GaussianVariational ngd_step(const QuadraticModel& model, const GaussianVariational& q, const VIConfig& cfg);

/// Stationary point of ngd_step: precision A / rho + I / eta and
/// mean (A + (rho / eta) I)^{-1} b.
GaussianVariational fixed_point(const QuadraticModel& model, const VIConfig& cfg);

}  // namespace tracer::vi
