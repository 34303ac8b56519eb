#include "tracer/optim/registry.hpp"

#include "tracer/autodiff/differentiate.hpp"

#include <array>
#include <string>

namespace tracer {
namespace {

constexpr std::array<std::string_view, 6> kNames = {"sgd", "momentum", "adam",
                                                    "sam", "sgd_tracer", "adam_tracer"};

[[noreturn]] void throw_step(std::string_view who, std::size_t t) {
    throw NonFiniteError(std::string(who) + ": non-finite update at step " + std::to_string(t));
}

class Sgd final : public Optimizer {
public:
    Sgd(std::string_view name, LrSchedule schedule, double momentum)
        : name_(name), schedule_(schedule), momentum_(momentum) {}

    std::string_view name() const override { return name_; }

    StepStats step(const Model& model, const DataBatch& batch, ParamVector& w, std::size_t t) override {
        auto lg = loss_and_gradient(model, w, batch);
        ParamVector next_w = w;
        MomentumState next_m = state_;
        sgd_update(next_w, lg.gradient, schedule_.at(t), momentum_, next_m);
        if (!next_w.allFinite()) throw_step(name_, t);
        w = std::move(next_w);
        state_ = std::move(next_m);
        const double norm = lg.gradient.norm();
        return {lg.loss, norm, 0.0, std::move(lg.gradient)};
    }

private:
    std::string_view name_;
    LrSchedule schedule_;
    double momentum_;
    MomentumState state_;
};

class Adam final : public Optimizer {
public:
    Adam(LrSchedule schedule, AdamParams params) : schedule_(schedule), params_(params) {}

    std::string_view name() const override { return "adam"; }

    StepStats step(const Model& model, const DataBatch& batch, ParamVector& w, std::size_t t) override {
        auto lg = loss_and_gradient(model, w, batch);
        ParamVector next_w = w;
        AdamState next = state_;
        adam_update(next_w, lg.gradient, lg.gradient, schedule_.at(t), params_, next);
        if (!next_w.allFinite()) throw_step("adam", t);
        w = std::move(next_w);
        state_ = std::move(next);
        const double norm = lg.gradient.norm();
        return {lg.loss, norm, 0.0, std::move(lg.gradient)};
    }

private:
    LrSchedule schedule_;
    AdamParams params_;
    AdamState state_;
};

class Sam final : public Optimizer {
public:
    explicit Sam(SamConfig cfg) : cfg_(cfg) { cfg_.validate(); }
    std::string_view name() const override { return "sam"; }
    StepStats step(const Model& model, const DataBatch& batch, ParamVector& w, std::size_t t) override {
        return sam_step(model, w, batch, cfg_, t, state_);
    }

private:
    SamConfig cfg_;
    MomentumState state_;
};

class SgdTracer final : public Optimizer {
public:
    explicit SgdTracer(TracerConfig cfg) : cfg_(cfg), fs_(cfg_.make_fisher_state()) {}
    std::string_view name() const override { return "sgd_tracer"; }
    StepStats step(const Model& model, const DataBatch& batch, ParamVector& w, std::size_t t) override {
        return tracer_step(model, w, batch, fs_, cfg_, t, state_);
    }

private:
    TracerConfig cfg_;
    FisherState fs_;
    MomentumState state_;
};

class AdamTracer final : public Optimizer {
public:
    explicit AdamTracer(TracerConfig cfg) : cfg_(cfg), fs_(cfg_.make_fisher_state()) {}
    std::string_view name() const override { return "adam_tracer"; }
    StepStats step(const Model& model, const DataBatch& batch, ParamVector& w, std::size_t t) override {
        return adam_tracer_step(model, w, batch, fs_, adam_, cfg_, t);
    }

private:
    TracerConfig cfg_;
    FisherState fs_;
    AdamState adam_;
};

}  // namespace

std::span<const std::string_view> optimizer_names() { return kNames; }

bool is_tracer_optimizer(std::string_view name) { return name == "sgd_tracer" || name == "adam_tracer"; }

TracerConfig tracer_config(const OptimizerSpec& spec) {
    TracerConfig cfg;
    cfg.rho = spec.rho;
    cfg.beta = spec.beta;
    cfg.delta = spec.delta;
    cfg.fd_step = spec.fd_step;
    cfg.schedule = spec.schedule;
    cfg.momentum = spec.momentum;
    cfg.adam = spec.adam;
    cfg.alias_second_moment = spec.alias_second_moment;
    cfg.validate();
    return cfg;
}

std::unique_ptr<Optimizer> make_optimizer(const OptimizerSpec& spec) {
    require(spec.schedule.base > 0.0, "optimizer: learning rate must be positive");
    require(spec.momentum >= 0.0 && spec.momentum < 1.0, "optimizer: momentum must lie in [0, 1)");
    if (spec.name == "sgd") return std::make_unique<Sgd>(kNames[0], spec.schedule, spec.momentum);
    if (spec.name == "momentum") {
        require(spec.momentum > 0.0, "optimizer 'momentum' needs momentum > 0");
        return std::make_unique<Sgd>(kNames[1], spec.schedule, spec.momentum);
    }
    if (spec.name == "adam") return std::make_unique<Adam>(spec.schedule, spec.adam);
    if (spec.name == "sam") return std::make_unique<Sam>(SamConfig{spec.rho_sam, spec.schedule, spec.momentum});
    if (spec.name == "sgd_tracer") return std::make_unique<SgdTracer>(tracer_config(spec));
    if (spec.name == "adam_tracer") return std::make_unique<AdamTracer>(tracer_config(spec));
    throw TracerError("unknown optimizer '" + spec.name + "'");
}

}  // namespace tracer
