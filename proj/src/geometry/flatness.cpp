#include "tracer/geometry/flatness.hpp"

#include "tracer/core/rng.hpp"

namespace tracer::geometry {

FlatnessProfile perturbation_flatness_profile(const LossFunction& loss, const ParamVector& w,
                                              const HvpOracle& hvp, const FlatnessOptions& options) {
    require(options.n_dirs >= 1, "flatness: need at least one direction");
    const double base = loss(w);
    FlatnessProfile out;
    out.trace = hutchinson_trace(hvp, w.size(), options.trace_probes, derive_seed(options.seed, Purpose::Probe),
                                 options.exec);
    const std::uint64_t mc_seed = derive_seed(options.seed, Purpose::MonteCarlo);
    for (double sigma : options.radii) {
        require(sigma >= 0.0, "flatness: radii must be non-negative");
        FlatnessRow row;
        row.sigma = sigma;
        row.second_order = 0.5 * sigma * sigma * out.trace.estimate;
        if (sigma > 0.0) {
            const auto m = parallel::blocked_moments(
                options.n_dirs,
                [&](std::size_t k) {
                    CounterRng rng(derive_seed(mc_seed, Purpose::MonteCarlo, k));
                    ParamVector x = w;
                    for (Eigen::Index i = 0; i < x.size(); ++i) x(i) += sigma * rng.normal();
                    return loss(x) - base;
                },
                options.exec, 256);
            row.mean_increase = m.mean;
            row.std_error = m.std_error();
        }
        out.rows.push_back(row);
    }
    return out;
}

}  // namespace tracer::geometry
