#include "tracer/optim/fisher.hpp"

#include <algorithm>

namespace tracer {

FisherState FisherState::with_damping(double beta, double delta) {
    require(beta > 0.0 && beta <= 1.0, "fisher: beta must lie in (0, 1]");
    require(delta >= 0.0, "fisher: damping must be non-negative");
    FisherState fs;
    fs.beta = beta;
    fs.damping = delta;
    return fs;
}

FisherState FisherState::with_auto_damping(double beta) {
    FisherState fs = with_damping(beta, 0.0);
    fs.auto_damping = true;
    return fs;
}

void FisherState::initialize(const Vector& g) {
    mean_sq = g.array().square().matrix();
    if (auto_damping) {
        damping = std::max(1e-8 * (1.0 + mean_sq.mean()), 1e-12);
    }
    initialized = true;
}

void FisherState::update(const Vector& g) {
    if (!initialized) {
        initialize(g);
        return;
    }
    require(g.size() == mean_sq.size(), "fisher: gradient length mismatch");
    mean_sq = (1.0 - beta) * mean_sq + beta * g.array().square().matrix();
}

Vector FisherState::inverse_damped() const {
    return (mean_sq.array() + damping).inverse().matrix();
}

}  // namespace tracer
