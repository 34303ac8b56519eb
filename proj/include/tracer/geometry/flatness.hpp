#pragma once

#include "tracer/geometry/hutchinson.hpp"

#include <functional>
#include <vector>

namespace tracer::geometry {

using LossFunction = std::function<double(const ParamVector&)>;

struct FlatnessOptions {
    std::vector<double> radii;
    std::size_t n_dirs = 1000;
    std::uint64_t seed = 0;
    std::size_t trace_probes = 100;
    parallel::Exec exec = parallel::Exec::OpenMP;
};

struct FlatnessRow {
    double sigma = 0.0;
    double mean_increase = 0.0;   ///< MC estimate of E[L(w + sigma z)] - L(w)
    double std_error = 0.0;
    double second_order = 0.0;    ///< 0.5 sigma^2 Tr(H), Hutchinson trace
};

struct FlatnessProfile {
    TraceEstimate trace;
    std::vector<FlatnessRow> rows;
};

/// Mean loss increase under isotropic Gaussian perturbations of each radius,
/// next to its second-order prediction. Direction k is shared across radii.
FlatnessProfile perturbation_flatness_profile(const LossFunction& loss, const ParamVector& w,
                                              const HvpOracle& hvp, const FlatnessOptions& options);

}  // namespace tracer::geometry
