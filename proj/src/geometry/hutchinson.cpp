#include "tracer/geometry/hutchinson.hpp"

#include "tracer/autodiff/differentiate.hpp"
#include "tracer/core/rng.hpp"

namespace tracer::geometry {

HvpOracle make_hvp_oracle(const Model& model, const ParamVector& w, const DataBatch& batch, double fd_step) {
    return [&model, w, &batch, fd_step](const Vector& v) {
        return hvp(HvpRequest{w, v, fd_step}, model, batch);
    };
}

HvpOracle matrix_oracle(Matrix a) {
    return [a = std::move(a)](const Vector& v) -> Vector { return a * v; };
}

Vector rademacher_probe(Eigen::Index dim, std::uint64_t seed, std::size_t k) {
    CounterRng rng(derive_seed(seed, Purpose::Probe, k));
    Vector z(dim);
    for (Eigen::Index i = 0; i < dim; ++i) z(i) = rng.rademacher();
    return z;
}

TraceEstimate hutchinson_trace(const HvpOracle& hvp, Eigen::Index dim, std::size_t n_probes, std::uint64_t seed,
                               parallel::Exec exec) {
    require(n_probes >= 1, "hutchinson_trace: need at least one probe");
    require(dim >= 1, "hutchinson_trace: dimension must be positive");
    const auto moments = parallel::blocked_moments(
        n_probes,
        [&](std::size_t k) {
            const Vector z = rademacher_probe(dim, seed, k);
            return z.dot(hvp(z));
        },
        exec, 64);
    return {moments.mean, moments.std_error(), n_probes};
}

}  // namespace tracer::geometry
