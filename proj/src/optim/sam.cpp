#include "tracer/optim/sam.hpp"

#include "tracer/autodiff/differentiate.hpp"

#include <cmath>
#include <string>

namespace tracer {

void SamConfig::validate() const {
    require(rho_sam > 0.0 && std::isfinite(rho_sam), "sam: rho_sam must be > 0");
    require(momentum >= 0.0 && momentum < 1.0, "sam: momentum must lie in [0, 1)");
}

SamGradient sam_gradient(const Model& model, const ParamVector& w, const DataBatch& batch, double rho_sam) {
    require(rho_sam > 0.0, "sam: rho_sam must be > 0");
    auto lg = loss_and_gradient(model, w, batch);
    SamGradient out;
    out.loss = lg.loss;
    const double norm = lg.gradient.norm();
    if (norm == 0.0) {
        out.perturbed = w;
        out.sam_gradient = lg.gradient;
    } else {
        out.perturbed = w + (rho_sam / norm) * lg.gradient;
        out.sam_gradient = gradient(model, out.perturbed, batch);
    }
    out.gradient = std::move(lg.gradient);
    return out;
}

StepStats sam_step(const Model& model, ParamVector& w, const DataBatch& batch, const SamConfig& cfg,
                   std::size_t t, MomentumState& momentum) {
    auto sg = sam_gradient(model, w, batch, cfg.rho_sam);
    ParamVector next_w = w;
    MomentumState next_m = momentum;
    sgd_update(next_w, sg.sam_gradient, cfg.schedule.at(t), cfg.momentum, next_m);
    if (!next_w.allFinite()) {
        throw NonFiniteError("sam_step: non-finite update at step " + std::to_string(t));
    }
    w = std::move(next_w);
    momentum = std::move(next_m);
    return {sg.loss, sg.gradient.norm(), 0.0, std::move(sg.gradient)};
}

}  // namespace tracer
