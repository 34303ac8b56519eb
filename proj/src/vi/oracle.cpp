#include "tracer/vi/oracle.hpp"

#include "tracer/core/rng.hpp"

#include <cmath>

namespace tracer::vi {

void VIConfig::validate() const {
    require(rho > 0.0 && std::isfinite(rho), "vi: rho must be > 0");
    require(eta > 0.0, "vi: eta must be > 0");
    require(alpha >= 0.0, "vi: alpha must be >= 0");
    require(beta >= 0.0 && beta <= 1.0, "vi: beta must lie in [0, 1]");
}

Expectations gaussian_expectations_quadratic(const QuadraticModel& model, const GaussianVariational& q) {
    require(q.dim() == static_cast<Eigen::Index>(model.num_params()), "vi: dimension mismatch");
    const Matrix sigma = q.covariance();
    Expectations e;
    e.expected_loss = model.value(q.mean) + 0.5 * model.hessian().cwiseProduct(sigma.transpose()).sum();
    e.expected_gradient = model.gradient(q.mean);
    e.expected_hessian = model.hessian();
    return e;
}

parallel::Moments monte_carlo_expected_loss(const QuadraticModel& model, const GaussianVariational& q,
                                            std::size_t n, std::uint64_t seed, parallel::Exec exec) {
    require(q.dim() == static_cast<Eigen::Index>(model.num_params()), "vi: dimension mismatch");
    Eigen::LLT<Matrix> llt(q.precision);
    require(llt.info() == Eigen::Success, "vi: precision is not positive-definite");
    const Matrix upper = llt.matrixU();
    return parallel::blocked_moments(
        n,
        [&](std::size_t k) {
            CounterRng rng(derive_seed(seed, Purpose::MonteCarlo, k));
            Vector z(q.dim());
            for (Eigen::Index i = 0; i < z.size(); ++i) z(i) = rng.normal();
            const Vector w = q.mean + upper.triangularView<Eigen::Upper>().solve(z);
            return model.value(w);
        },
        exec, 4096);
}

double kl_to_prior(const GaussianVariational& q, double eta) {
    require(eta > 0.0 && std::isfinite(eta), "vi: kl_to_prior needs a finite prior variance");
    const double p = static_cast<double>(q.dim());
    const Matrix sigma = q.covariance();
    return 0.5 * (sigma.trace() / eta + q.mean.squaredNorm() / eta - p + p * std::log(eta) + q.log_det_precision());
}

double objective_value(const QuadraticModel& model, const GaussianVariational& q, const VIConfig& cfg) {
    const double expected = gaussian_expectations_quadratic(model, q).expected_loss;
    if (cfg.improper_prior()) return expected - cfg.rho * entropy(q);
    return expected + cfg.rho * kl_to_prior(q, cfg.eta);
}

GaussianVariational ngd_step(const QuadraticModel& model, const GaussianVariational& q, const VIConfig& cfg) {
    cfg.validate();
    require(q.dim() == static_cast<Eigen::Index>(model.num_params()), "vi: dimension mismatch");
    const Eigen::Index p = q.dim();
    const double inv_eta = cfg.improper_prior() ? 0.0 : 1.0 / cfg.eta;

    Matrix target = model.hessian() / cfg.rho;
    target.diagonal().array() += inv_eta;
    GaussianVariational next;
    next.precision = (1.0 - cfg.beta) * q.precision + cfg.beta * target;

    Eigen::LLT<Matrix> llt(next.precision);
    if (llt.info() != Eigen::Success || !next.precision.allFinite()) {
        throw TracerError("precision left the PD cone");
    }
    Vector direction = model.gradient(q.mean);
    if (inv_eta != 0.0) direction += (cfg.rho * inv_eta) * q.mean;
    next.mean = q.mean - cfg.alpha * llt.solve(direction);
    require(next.mean.size() == p, "vi: internal size error");
    return next;
}

GaussianVariational fixed_point(const QuadraticModel& model, const VIConfig& cfg) {
    cfg.validate();
    const double inv_eta = cfg.improper_prior() ? 0.0 : 1.0 / cfg.eta;
    GaussianVariational q;
    q.precision = model.hessian() / cfg.rho;
    q.precision.diagonal().array() += inv_eta;
    Matrix shifted = model.hessian();
    shifted.diagonal().array() += cfg.rho * inv_eta;
    Eigen::LLT<Matrix> llt(shifted);
    require(llt.info() == Eigen::Success, "vi: fixed point needs a positive-definite curvature");
    q.mean = llt.solve(model.linear());
    return q;
}

}  // namespace tracer::vi
