#pragma once

#include "tracer/models/model.hpp"
#include "tracer/parallel/kernels.hpp"

#include <cstdint>
#include <functional>

namespace tracer::geometry {

/// v -> H v for a fixed Hessian H. Must be safe to call concurrently.
using HvpOracle = std::function<Vector(const Vector&)>;

/// Finite-difference Hessian-vector products of the batch loss at w.
HvpOracle make_hvp_oracle(const Model& model, const ParamVector& w, const DataBatch& batch,
                          double fd_step = 0.0);

/// v -> A v for an explicit matrix.
HvpOracle matrix_oracle(Matrix a);

struct TraceEstimate {
    double estimate = 0.0;
    double std_error = 0.0;
    std::size_t probes = 0;
};

/// Mean of z^T H z over Rademacher probes z. Probe k draws from its own
/// stream derived from (seed, k), so the estimate does not depend on the
/// execution mode or thread count.
TraceEstimate hutchinson_trace(const HvpOracle& hvp, Eigen::Index dim, std::size_t n_probes, std::uint64_t seed,
                               parallel::Exec exec = parallel::Exec::OpenMP);

/// Rademacher probe k of the stream keyed by seed.
Vector rademacher_probe(Eigen::Index dim, std::uint64_t seed, std::size_t k);

}  // namespace tracer::geometry
