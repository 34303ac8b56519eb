#pragma once

#include "tracer/models/model.hpp"
#include "tracer/optim/schedule.hpp"
#include "tracer/optim/tracer.hpp"
#include "tracer/optim/updates.hpp"

namespace tracer {

struct SamConfig {
    double rho_sam = 0.05;  ///< perturbation radius, > 0
    LrSchedule schedule;
    double momentum = 0.0;

    void validate() const;
};

struct SamGradient {
    double loss = 0.0;       ///< L_B(w)
    Vector gradient;         ///< g = grad L_B(w)
    ParamVector perturbed;   ///< w + rho g / ||g||, or w when g == 0
    Vector sam_gradient;     ///< grad L_B at the perturbed point
};

/// First-order sharpness-aware gradient: the loss gradient evaluated at the
/// worst-case point of the rho-ball under the linearized loss.
SamGradient sam_gradient(const Model& model, const ParamVector& w, const DataBatch& batch, double rho_sam);

/// w <- w - alpha_t * sam_gradient (optionally through a momentum buffer).
StepStats sam_step(const Model& model, ParamVector& w, const DataBatch& batch, const SamConfig& cfg,
                   std::size_t t, MomentumState& momentum);

}  // namespace tracer
