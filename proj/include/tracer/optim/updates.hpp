#pragma once

#include "tracer/core/types.hpp"

#include <cstddef>

namespace tracer {

/// Heavy-ball buffer: v <- momentum v + d,  w <- w - lr v.
struct MomentumState {
    Vector velocity;
};

struct AdamParams {
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

struct AdamState {
    Vector m;
    Vector v;
    std::size_t steps = 0;
};

/// Plain SGD when momentum == 0 (the buffer is not touched).
void sgd_update(Vector& w, const Vector& direction, double lr, double momentum, MomentumState& state);

/// Bias-corrected Adam. The first moment tracks `direction`, the second
/// moment tracks `second_moment_input` squared (normally the same vector).
void adam_update(Vector& w, const Vector& direction, const Vector& second_moment_input, double lr,
                 const AdamParams& params, AdamState& state);

}  // namespace tracer
