#pragma once

#include "tracer/models/model.hpp"

namespace tracer {

struct LossAndGradient {
    double loss = 0.0;
    Vector gradient;
};

/// Mean batch loss at w, evaluated on a fresh tape.
double loss(const Model& model, const ParamVector& w, const DataBatch& batch);

/// Exact reverse-mode gradient of the mean batch loss. Throws NonFiniteError
/// naming the first non-finite node when the loss is not finite.
LossAndGradient loss_and_gradient(const Model& model, const ParamVector& w, const DataBatch& batch);

Vector gradient(const Model& model, const ParamVector& w, const DataBatch& batch);

/// A Hessian-vector product request: H(point) * direction, with H the
/// Hessian of the batch loss.
struct HvpRequest {
    ParamVector point;
    Vector direction;
    double fd_step = 0.0;  ///< <= 0 selects default_fd_step(point)
};

/// 1e-4 * (1 + ||w||_2).
double default_fd_step(const ParamVector& w);

/// Central difference of exact gradients along v:
///   (grad L(w + e v) - grad L(w - e v)) / (2 e),  e = fd_step / max(||v||, tiny).
/// Exact up to round-off on quadratics; v = 0 gives exactly zero.
Vector hvp(const HvpRequest& request, const Model& model, const DataBatch& batch);

}  // namespace tracer
