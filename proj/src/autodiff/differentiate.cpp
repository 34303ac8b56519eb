#include "tracer/autodiff/differentiate.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace tracer {
namespace {

[[noreturn]] void throw_non_finite(const ad::Tape& tape, const char* what) {
    const auto bad = tape.first_non_finite();
    std::string msg = std::string(what) + ": non-finite loss";
    if (bad) {
        msg += " (first non-finite node #" + std::to_string(*bad) + ", op " +
               std::string(ad::op_name(tape.op(*bad))) + ")";
    }
    throw NonFiniteError(msg);
}

}  // namespace

double loss(const Model& model, const ParamVector& w, const DataBatch& batch) {
    ad::Tape tape;
    const auto root = model.record_loss(tape, {w.data(), static_cast<std::size_t>(w.size())}, batch);
    return tape.scalar_value(root);
}

LossAndGradient loss_and_gradient(const Model& model, const ParamVector& w, const DataBatch& batch) {
    require(static_cast<std::size_t>(w.size()) == model.num_params(), "gradient: parameter length mismatch");
    ad::Tape tape;
    const auto root = model.record_loss(tape, {w.data(), static_cast<std::size_t>(w.size())}, batch);
    const double value = tape.scalar_value(root);
    if (!std::isfinite(value)) throw_non_finite(tape, "gradient");
    tape.backward(root);
    return {value, tape.leaf_gradient(model.num_params())};
}

Vector gradient(const Model& model, const ParamVector& w, const DataBatch& batch) {
    return loss_and_gradient(model, w, batch).gradient;
}

double default_fd_step(const ParamVector& w) { return 1e-4 * (1.0 + w.norm()); }

Vector hvp(const HvpRequest& request, const Model& model, const DataBatch& batch) {
    require(request.direction.size() == request.point.size(), "hvp: direction length mismatch");
    require(request.direction.allFinite(), "hvp: direction must be finite");
    const double norm = request.direction.norm();
    if (norm == 0.0) return Vector::Zero(request.point.size());
    const double step = request.fd_step > 0.0 ? request.fd_step : default_fd_step(request.point);
    const double eps = step / std::max(norm, std::numeric_limits<double>::min());
    const ParamVector plus = request.point + eps * request.direction;
    const ParamVector minus = request.point - eps * request.direction;
    // loss_and_gradient throws on a non-finite perturbed loss.
    const Vector g_plus = loss_and_gradient(model, plus, batch).gradient;
    const Vector g_minus = loss_and_gradient(model, minus, batch).gradient;
    return (g_plus - g_minus) / (2.0 * eps);
}

}  // namespace tracer
