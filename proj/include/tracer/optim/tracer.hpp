#pragma once

#include "tracer/models/model.hpp"
#include "tracer/optim/fisher.hpp"
#include "tracer/optim/schedule.hpp"
#include "tracer/optim/updates.hpp"

#include <optional>

namespace tracer {

/// Hyperparameters shared by SGD-TRACER and Adam-TRACER.
struct TracerConfig {
    double rho = 0.0;              ///< penalty strength, >= 0
    double beta = 0.999;           ///< Fisher smoothing, in (0, 1]
    std::optional<double> delta;   ///< damping > 0; empty selects the automatic rule
    double fd_step = 0.0;          ///< Hessian-vector step, <= 0 for the default
    LrSchedule schedule;
    double momentum = 0.0;         ///< SGD-TRACER only
    AdamParams adam;               ///< Adam-TRACER only
    /// Adam-TRACER: use Adam's (uncorrected) second moment of the raw gradient
    /// as f_bar instead of a separate average.
    bool alias_second_moment = false;

    void validate() const;
    FisherState make_fisher_state() const;
};

/// Result of one optimizer step, measured at the pre-step point.
struct StepStats {
    double loss = 0.0;
    double grad_norm = 0.0;
    double penalty = 0.0;
    Vector gradient;  ///< raw batch gradient
};

/// rho * sum_i g_i^2 / (f_bar_i + delta).
double tracer_penalty(const Vector& g, const FisherState& fs, double rho);

struct TracerGradient {
    double loss = 0.0;
    Vector gradient;   ///< g = grad L_B(w)
    Vector augmented;  ///< g + 2 rho H (g / (f_bar + delta))
    double penalty = 0.0;
};

/// Gradient of L_B(w) + rho <g^2, (f_bar + delta)^{-1}> with f_bar held fixed.
/// The curvature term is one Hessian-vector product along g / (f_bar + delta).
/// With rho == 0 the augmented gradient is g itself, bit for bit.
TracerGradient tracer_grad(const Model& model, const ParamVector& w, const DataBatch& batch,
                           const FisherState& fs, const TracerConfig& cfg);

/// Same, reusing an already computed loss and gradient at w.
TracerGradient tracer_grad(const Model& model, const ParamVector& w, const DataBatch& batch,
                           double loss_value, Vector g, const FisherState& fs, const TracerConfig& cfg);

/// One SGD-TRACER step at index t:
///   w <- w - alpha_t * tracer_grad(w)        (f_bar from before this step)
///   f_bar <- (1 - beta) f_bar + beta g^2
/// On the first call f_bar is initialized to g^2. Throws NonFiniteError and
/// leaves w, fs and the momentum buffer untouched if the update is not finite.
StepStats tracer_step(const Model& model, ParamVector& w, const DataBatch& batch, FisherState& fs,
                      const TracerConfig& cfg, std::size_t t, MomentumState& momentum);

/// Adam applied to the augmented gradient. By default f_bar is a separate
/// average of the raw g^2 with rate beta. In alias mode Adam's second moment
/// is accumulated from the raw gradient and doubles as f_bar; the penalty is
/// inactive on the very first step, where that moment is still zero.
StepStats adam_tracer_step(const Model& model, ParamVector& w, const DataBatch& batch, FisherState& fs,
                           AdamState& adam, const TracerConfig& cfg, std::size_t t);

}  // namespace tracer
