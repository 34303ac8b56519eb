#pragma once

#include "tracer/core/types.hpp"

namespace tracer {

/// Exponentially smoothed squared gradients f_bar with smoothing beta and
/// damping delta:  f_bar <- (1 - beta) f_bar + beta g^2.
///
/// The first gradient seen initializes f_bar = g0^2. With automatic damping
/// delta is fixed at that moment to max(1e-8 (1 + mean(f_bar_0)), 1e-12).
struct FisherState {
    Vector mean_sq;
    double beta = 0.999;
    double damping = 0.0;
    bool auto_damping = false;
    bool initialized = false;

    static FisherState with_damping(double beta, double delta);
    static FisherState with_auto_damping(double beta);

    void initialize(const Vector& g);
    /// Smoothing update; initializes from g when not yet initialized.
    void update(const Vector& g);
    /// Sum of f_bar.
    double trace() const { return mean_sq.sum(); }
    /// (f_bar + delta)^{-1} elementwise.
    Vector inverse_damped() const;
};

}  // namespace tracer
