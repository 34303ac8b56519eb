#include "tracer/vi/consistency.hpp"

#include "tracer/core/rng.hpp"
#include "tracer/optim/tracer.hpp"

namespace tracer::vi {

ad::Var ShiftedQuadraticModel::record_loss(ad::Tape& tape, std::span<const double> w,
                                           const DataBatch& batch) const {
    const auto base = base_.record_loss(tape, w, batch);
    require(batch.inputs.rows() >= 1 && batch.inputs.cols() == static_cast<Eigen::Index>(w.size()),
            "shifted quadratic: batch must hold one shift row of length p");
    const Vector xi = batch.inputs.row(0).transpose();
    const auto x = tape.leaf(w, 0, static_cast<Eigen::Index>(w.size()), 1);
    return tape.sub(base, tape.dot(tape.constant(xi), x));
}

DataBatch ShiftedQuadraticModel::shift_batch(const Vector& xi) {
    DataBatch b;
    b.inputs = xi.transpose();
    b.targets = Vector::Zero(1);
    return b;
}

void bridge_step(const QuadraticModel& model, Vector& mean, Matrix& smoothed_hessian, double alpha, double beta) {
    smoothed_hessian = (1.0 - beta) * smoothed_hessian + beta * model.hessian();
    Eigen::LLT<Matrix> llt(smoothed_hessian);
    if (llt.info() != Eigen::Success) throw TracerError("smoothed Hessian left the PD cone");
    mean -= alpha * llt.solve(model.gradient(mean));
}

ConsistencyReport tracer_consistency_check(const QuadraticModel& model, const ConsistencyConfig& cfg) {
    require(model.is_diagonal(), "consistency check requires a diagonal quadratic");
    require(cfg.rho >= 0.0 && cfg.beta > 0.0 && cfg.beta <= 1.0 && cfg.delta > 0.0,
            "consistency check: invalid configuration");
    const auto p = static_cast<Eigen::Index>(model.num_params());
    const Vector start = cfg.start.size() == 0 ? Vector::Zero(p) : cfg.start;
    require(start.size() == p, "consistency check: start has wrong length");

    ConsistencyReport report;
    report.dim = static_cast<std::size_t>(p);

    Vector mu = start;
    Matrix hbar = Matrix::Identity(p, p);

    const ShiftedQuadraticModel noisy(model);
    TracerConfig tcfg;
    tcfg.rho = cfg.rho;
    tcfg.beta = cfg.beta;
    tcfg.delta = cfg.delta;
    tcfg.schedule = LrSchedule{ScheduleKind::Constant, cfg.alpha, 0};
    FisherState fs = tcfg.make_fisher_state();
    MomentumState momentum;
    ParamVector w = start;

    double penalty_sum = 0.0;
    std::size_t penalty_count = 0;
    const std::uint64_t noise_seed = derive_seed(cfg.seed, Purpose::GradientNoise);
    for (std::size_t t = 0; t < cfg.steps; ++t) {
        bridge_step(model, mu, hbar, cfg.alpha, cfg.beta);

        CounterRng rng(noise_seed, t * static_cast<std::uint64_t>(2 * p));
        Vector xi(p);
        for (Eigen::Index i = 0; i < p; ++i) xi(i) = cfg.noise_std * rng.normal();
        const auto stats = tracer_step(noisy, w, ShiftedQuadraticModel::shift_batch(xi), fs, tcfg, t, momentum);
        if (t >= cfg.steps / 2 && cfg.rho > 0.0) {
            penalty_sum += stats.penalty / cfg.rho;
            ++penalty_count;
        }
        report.mean_discrepancy.push_back((mu - w).norm());
    }

    report.oracle_mean = mu;
    report.oracle_smoothed_hessian = hbar.diagonal();
    report.tracer_mean = w;
    report.tracer_fisher = fs.mean_sq;
    report.trace_ratio = (model.hessian().diagonal().array() / hbar.diagonal().array()).sum();
    report.tail_penalty_over_rho = penalty_count ? penalty_sum / static_cast<double>(penalty_count) : 0.0;
    return report;
}

nlohmann::json to_json(const ConsistencyReport& report) {
    auto vec = [](const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); };
    return {{"dim", report.dim},
            {"steps", report.mean_discrepancy.size()},
            {"final_mean_discrepancy", report.mean_discrepancy.empty() ? 0.0 : report.mean_discrepancy.back()},
            {"mean_discrepancy", report.mean_discrepancy},
            {"oracle_mean", vec(report.oracle_mean)},
            {"oracle_smoothed_hessian", vec(report.oracle_smoothed_hessian)},
            {"tracer_mean", vec(report.tracer_mean)},
            {"tracer_fisher", vec(report.tracer_fisher)},
            {"trace_ratio", report.trace_ratio},
            {"tail_penalty_over_rho", report.tail_penalty_over_rho}};
}

}  // namespace tracer::vi
