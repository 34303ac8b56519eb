#pragma once

#include "tracer/models/model.hpp"
#include "tracer/optim/sam.hpp"
#include "tracer/optim/tracer.hpp"

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>

namespace tracer {

/// Every optimizer hyperparameter the registry understands. Fields a given
/// optimizer does not use are ignored.
struct OptimizerSpec {
    std::string name;
    LrSchedule schedule;
    double momentum = 0.0;
    AdamParams adam;
    double rho = 0.0;
    double beta = 0.999;
    std::optional<double> delta;
    double fd_step = 0.0;
    double rho_sam = 0.05;
    bool alias_second_moment = false;
};

/// Uniform step interface: one call consumes one batch and advances w.
class Optimizer {
public:
    virtual ~Optimizer() = default;
    virtual std::string_view name() const = 0;
    virtual StepStats step(const Model& model, const DataBatch& batch, ParamVector& w, std::size_t t) = 0;
};

/// sgd, momentum, adam, sam, sgd_tracer, adam_tracer.
std::span<const std::string_view> optimizer_names();

bool is_tracer_optimizer(std::string_view name);

std::unique_ptr<Optimizer> make_optimizer(const OptimizerSpec& spec);

TracerConfig tracer_config(const OptimizerSpec& spec);

}  // namespace tracer
