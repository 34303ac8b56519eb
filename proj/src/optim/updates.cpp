#include "tracer/optim/updates.hpp"

#include <cmath>

namespace tracer {

void sgd_update(Vector& w, const Vector& direction, double lr, double momentum, MomentumState& state) {
    require(direction.size() == w.size(), "sgd_update: length mismatch");
    if (momentum == 0.0) {
        w -= lr * direction;
        return;
    }
    if (state.velocity.size() != w.size()) state.velocity = Vector::Zero(w.size());
    state.velocity = momentum * state.velocity + direction;
    w -= lr * state.velocity;
}

void adam_update(Vector& w, const Vector& direction, const Vector& second_moment_input, double lr,
                 const AdamParams& params, AdamState& state) {
    require(direction.size() == w.size() && second_moment_input.size() == w.size(),
            "adam_update: length mismatch");
    if (state.m.size() != w.size()) {
        state.m = Vector::Zero(w.size());
        state.v = Vector::Zero(w.size());
        state.steps = 0;
    }
    ++state.steps;
    const double t = static_cast<double>(state.steps);
    state.m = params.beta1 * state.m + (1.0 - params.beta1) * direction;
    state.v = params.beta2 * state.v + (1.0 - params.beta2) * second_moment_input.array().square().matrix();
    const double c1 = 1.0 - std::pow(params.beta1, t);
    const double c2 = 1.0 - std::pow(params.beta2, t);
    w.array() -= lr * (state.m.array() / c1) / ((state.v.array() / c2).sqrt() + params.eps);
}

}  // namespace tracer
