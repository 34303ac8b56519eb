#include "tracer/optim/tracer.hpp"

#include "tracer/autodiff/differentiate.hpp"

#include <cmath>
#include <string>

namespace tracer {

void TracerConfig::validate() const {
    require(rho >= 0.0 && std::isfinite(rho), "tracer: rho must be >= 0");
    require(beta > 0.0 && beta <= 1.0, "tracer: beta must lie in (0, 1]");
    if (delta) require(*delta > 0.0, "tracer: delta must be > 0");
    require(momentum >= 0.0 && momentum < 1.0, "tracer: momentum must lie in [0, 1)");
}

FisherState TracerConfig::make_fisher_state() const {
    return delta ? FisherState::with_damping(beta, *delta) : FisherState::with_auto_damping(beta);
}

double tracer_penalty(const Vector& g, const FisherState& fs, double rho) {
    require(fs.initialized, "tracer_penalty: Fisher state not initialized");
    require(g.size() == fs.mean_sq.size(), "tracer_penalty: length mismatch");
    return rho * (g.array().square() / (fs.mean_sq.array() + fs.damping)).sum();
}

TracerGradient tracer_grad(const Model& model, const ParamVector& w, const DataBatch& batch,
                           double loss_value, Vector g, const FisherState& fs, const TracerConfig& cfg) {
    TracerGradient out;
    out.loss = loss_value;
    out.penalty = tracer_penalty(g, fs, cfg.rho);
    out.gradient = std::move(g);
    if (cfg.rho == 0.0) {
        out.augmented = out.gradient;
        return out;
    }
    const Vector direction = out.gradient.cwiseProduct(fs.inverse_damped());
    const Vector hv = hvp(HvpRequest{w, direction, cfg.fd_step}, model, batch);
    out.augmented = out.gradient + (2.0 * cfg.rho) * hv;
    return out;
}

TracerGradient tracer_grad(const Model& model, const ParamVector& w, const DataBatch& batch,
                           const FisherState& fs, const TracerConfig& cfg) {
    auto lg = loss_and_gradient(model, w, batch);
    return tracer_grad(model, w, batch, lg.loss, std::move(lg.gradient), fs, cfg);
}

namespace {

[[noreturn]] void throw_step(std::size_t t, const char* who) {
    throw NonFiniteError(std::string(who) + ": non-finite update at step " + std::to_string(t));
}

}  // namespace

StepStats tracer_step(const Model& model, ParamVector& w, const DataBatch& batch, FisherState& fs,
                      const TracerConfig& cfg, std::size_t t, MomentumState& momentum) {
    auto lg = loss_and_gradient(model, w, batch);
    FisherState next_fs = fs;
    if (!next_fs.initialized) next_fs.initialize(lg.gradient);

    auto tg = tracer_grad(model, w, batch, lg.loss, std::move(lg.gradient), next_fs, cfg);

    ParamVector next_w = w;
    MomentumState next_m = momentum;
    sgd_update(next_w, tg.augmented, cfg.schedule.at(t), cfg.momentum, next_m);
    if (!next_w.allFinite()) throw_step(t, "tracer_step");

    next_fs.update(tg.gradient);
    w = std::move(next_w);
    momentum = std::move(next_m);
    fs = std::move(next_fs);
    return {tg.loss, tg.gradient.norm(), tg.penalty, std::move(tg.gradient)};
}

StepStats adam_tracer_step(const Model& model, ParamVector& w, const DataBatch& batch, FisherState& fs,
                           AdamState& adam, const TracerConfig& cfg, std::size_t t) {
    auto lg = loss_and_gradient(model, w, batch);
    FisherState next_fs = fs;
    AdamState next_adam = adam;
    ParamVector next_w = w;
    TracerGradient tg;

    if (cfg.alias_second_moment) {
        const bool first = next_adam.steps == 0;
        if (first) {
            next_fs.initialize(lg.gradient);
            next_fs.mean_sq.setZero();
        } else {
            next_fs.mean_sq = next_adam.v;
        }
        TracerConfig active = cfg;
        if (first) active.rho = 0.0;
        tg = tracer_grad(model, w, batch, lg.loss, std::move(lg.gradient), next_fs, active);
        if (first) tg.penalty = 0.0;
        adam_update(next_w, tg.augmented, tg.gradient, cfg.schedule.at(t), cfg.adam, next_adam);
        next_fs.mean_sq = next_adam.v;
    } else {
        if (!next_fs.initialized) next_fs.initialize(lg.gradient);
        tg = tracer_grad(model, w, batch, lg.loss, std::move(lg.gradient), next_fs, cfg);
        adam_update(next_w, tg.augmented, tg.augmented, cfg.schedule.at(t), cfg.adam, next_adam);
        next_fs.update(tg.gradient);
    }
    if (!next_w.allFinite()) throw_step(t, "adam_tracer_step");

    w = std::move(next_w);
    adam = std::move(next_adam);
    fs = std::move(next_fs);
    return {tg.loss, tg.gradient.norm(), tg.penalty, std::move(tg.gradient)};
}

}  // namespace tracer
