#pragma once

#include "tracer/models/quadratic.hpp"
#include "tracer/vi/oracle.hpp"

#include <json.hpp>

#include <cstdint>
#include <vector>

namespace tracer::vi {

/// Quadratic loss whose gradient is shifted by a per-batch vector xi:
///   L_B(w) = L(w) - xi_B^T w,   xi_B = first row of batch.inputs.
/// The Hessian is A for every batch, so finite-difference curvature is exact
/// while gradients carry controllable noise.
class ShiftedQuadraticModel final : public Model {
public:
    explicit ShiftedQuadraticModel(QuadraticModel base) : base_(std::move(base)) {}

    std::size_t num_params() const override { return base_.num_params(); }
    ad::Var record_loss(ad::Tape& tape, std::span<const double> w, const DataBatch& batch) const override;
    std::string kind() const override { return "shifted_quadratic"; }

    const QuadraticModel& base() const { return base_; }

    /// A batch holding the shift xi as its only input row.
    static DataBatch shift_batch(const Vector& xi);

private:
    QuadraticModel base_;
};

struct ConsistencyConfig {
    double rho = 0.1;
    double alpha = 0.1;        ///< step for both the bridge and SGD-TRACER
    double beta = 0.1;         ///< smoothing for both H_bar and f_bar
    double delta = 1e-8;       ///< SGD-TRACER damping
    std::size_t steps = 1000;
    double noise_std = 0.0;    ///< std of the gradient shift fed to SGD-TRACER
    std::uint64_t seed = 0;
    Vector start;              ///< empty: start at the origin
};

struct ConsistencyReport {
    std::vector<double> mean_discrepancy;  ///< ||mu_t - w_t|| after each step
    Vector oracle_mean;
    Vector oracle_smoothed_hessian;        ///< diagonal of H_bar
    Vector tracer_mean;
    Vector tracer_fisher;                  ///< final f_bar
    double trace_ratio = 0.0;              ///< Tr(H H_bar^{-1}) at the final H_bar
    double tail_penalty_over_rho = 0.0;    ///< mean of the SGD-TRACER penalty / rho over the last half
    std::size_t dim = 0;
};

/// One step of the curvature-preconditioned mean update on a quadratic:
///   H_bar <- (1 - beta) H_bar + beta A
///   mu    <- mu - alpha H_bar^{-1} grad[L(mu) + rho Tr(A H_bar^{-1})]
/// The trace term is constant in mu for a quadratic, so only grad L remains.
/// For rho > 0 this is ngd_step with precision H_bar / rho and mean step
/// alpha / rho.
void bridge_step(const QuadraticModel& model, Vector& mean, Matrix& smoothed_hessian, double alpha, double beta);

/// Runs the diagonal bridge and SGD-TRACER (preconditioner dropped) side by
/// side from the same start. Requires a diagonal A.
ConsistencyReport tracer_consistency_check(const QuadraticModel& model, const ConsistencyConfig& cfg);

nlohmann::json to_json(const ConsistencyReport& report);

}  // namespace tracer::vi
