#include "oracles.hpp"

#include "tracer/autodiff/differentiate.hpp"
#include "tracer/core/rng.hpp"
#include "tracer/models/mlp.hpp"
#include "tracer/models/quadratic.hpp"
#include "tracer/optim/registry.hpp"
#include "tracer/optim/sam.hpp"
#include "tracer/optim/tracer.hpp"

#include <gtest/gtest.h>

#include <numbers>

using namespace tracer;

namespace {

Vector vec(std::initializer_list<double> xs) {
    Vector v(static_cast<Eigen::Index>(xs.size()));
    Eigen::Index i = 0;
    for (double x : xs) v(i++) = x;
    return v;
}

FisherState fisher(const Vector& mean_sq, double delta, double beta = 0.999) {
    FisherState fs = FisherState::with_damping(beta, delta);
    fs.mean_sq = mean_sq;
    fs.initialized = true;
    return fs;
}

TracerConfig tracer_cfg(double rho, double lr, std::optional<double> delta = 1e-3, double momentum = 0.0) {
    TracerConfig cfg;
    cfg.rho = rho;
    cfg.beta = 0.9;
    cfg.delta = delta;
    cfg.schedule = {ScheduleKind::Constant, lr, 0};
    cfg.momentum = momentum;
    return cfg;
}

const QuadraticModel& diag12() {
    static const QuadraticModel m = QuadraticModel::diagonal(vec({1.0, 2.0}), Vector::Zero(2));
    return m;
}

struct Problem {
    MlpModel model{{2, 6, 2}, Activation::Tanh, Head::Classification};
    DataBatch data;
    Problem() {
        std::mt19937_64 gen(17);
        data = oracle::random_classification_batch(gen, 64, 2, 2);
    }
    DataBatch batch(std::size_t t) const {
        CounterRng rng(derive_seed(5, Purpose::Shuffle, t));
        auto order = permutation(data.size(), rng);
        order.resize(8);
        return data.select(order);
    }
};

}  // namespace

TEST(Fisher, BetaOneCopiesSquaredGradient) {
    FisherState fs = fisher(vec({5.0, 7.0}), 1e-3, 1.0);
    fs.update(vec({3.0, -2.0}));
    EXPECT_EQ(fs.mean_sq, vec({9.0, 4.0}));
}

TEST(Fisher, SmoothingExample) {
    FisherState fs = fisher(vec({1.0, 1.0}), 1e-3, 0.5);
    fs.update(vec({2.0, 0.0}));
    EXPECT_EQ(fs.mean_sq, vec({2.5, 0.5}));
}

TEST(Fisher, ZeroGradientsDecayGeometrically) {
    const double beta = 0.3;
    FisherState fs = fisher(vec({4.0, 1.0, 0.5}), 1e-3, beta);
    const Vector f0 = fs.mean_sq;
    for (int k = 1; k <= 25; ++k) {
        fs.update(Vector::Zero(3));
        EXPECT_LE(oracle::rel_err(fs.mean_sq, Vector(std::pow(1.0 - beta, k) * f0)), 1e-13);
    }
}

TEST(Fisher, FirstUpdateInitializesAndAutoDamping) {
    FisherState fs = FisherState::with_auto_damping(0.9);
    fs.update(vec({1.0, 3.0}));
    EXPECT_TRUE(fs.initialized);
    EXPECT_EQ(fs.mean_sq, vec({1.0, 9.0}));
    EXPECT_DOUBLE_EQ(fs.damping, 1e-8 * 6.0);
    FisherState tiny = FisherState::with_auto_damping(0.9);
    tiny.initialize(Vector::Zero(2));
    EXPECT_DOUBLE_EQ(tiny.damping, 1e-8);
}

TEST(Fisher, StaysNonNegative) {
    std::mt19937_64 gen(1);
    FisherState fs = FisherState::with_damping(0.37, 1e-3);
    for (int k = 0; k < 200; ++k) {
        fs.update(oracle::random_vector(gen, 5, 10.0));
        ASSERT_GE(fs.mean_sq.minCoeff(), 0.0);
    }
}

TEST(Penalty, Examples) {
    EXPECT_EQ(tracer_penalty(Vector::Zero(3), fisher(Vector::Ones(3), 1.0), 0.7), 0.0);
    EXPECT_NEAR(tracer_penalty(vec({1.0, 2.0}), fisher(vec({1.0, 1.0}), 1.0), 0.1), 0.25, 1e-15);
    const Vector g = vec({0.5, -3.0, 2.0, 1e-3});
    EXPECT_NEAR(tracer_penalty(g, fisher(g.cwiseAbs2(), 1e-300), 1.0), 4.0, 1e-12);
    EXPECT_THROW(tracer_penalty(Vector::Ones(2), fisher(Vector::Ones(3), 1.0), 1.0), TracerError);
}

TEST(Penalty, NonNegativeForRandomInputs) {
    std::mt19937_64 gen(2);
    for (int k = 0; k < 100; ++k) {
        const Vector g = oracle::random_vector(gen, 6);
        const Vector f = oracle::random_vector(gen, 6).cwiseAbs2();
        EXPECT_GE(tracer_penalty(g, fisher(f, 1e-6), 0.3), 0.0);
    }
}

TEST(Penalty, DiagonalReparameterizationInvariance) {
    std::mt19937_64 gen(3);
    std::uniform_real_distribution<double> scale(0.01, 100.0);
    for (int k = 0; k < 50; ++k) {
        const Vector g = oracle::random_vector(gen, 8);
        const Vector f = oracle::random_vector(gen, 8).cwiseAbs2();
        Vector a(8);
        for (int i = 0; i < 8; ++i) a(i) = scale(gen);
        const Vector g2 = g.cwiseQuotient(a);
        const Vector f2 = f.cwiseQuotient(a.cwiseAbs2());
        EXPECT_LE(oracle::rel_err(tracer_penalty(g2, fisher(f2, 0.0), 0.5), tracer_penalty(g, fisher(f, 0.0), 0.5)),
                  1e-10);
    }
}

TEST(Penalty, ReluSymmetryInvarianceWithTransport) {
    std::mt19937_64 gen(4);
    const MlpModel m({3, 10, 2}, Activation::Relu, Head::Classification);
    const auto batch = oracle::random_classification_batch(gen, 40, 3, 2);
    const Vector w = m.initialize(4);
    const Vector g = gradient(m, w, batch);
    const Vector f = (g.cwiseAbs2() + oracle::random_vector(gen, g.size()).cwiseAbs2()) / 2.0;
    const Vector a = diagonal_rescaling(m, 0, 2.0);
    const Vector w2 = rescale_diagonal(m, view(w), 0, 2.0);
    const Vector g2 = gradient(m, w2, batch);
    EXPECT_GT((g2 - g).norm() / g.norm(), 0.1);
    const Vector f2 = f.cwiseQuotient(a.cwiseAbs2());
    EXPECT_LE(oracle::rel_err(tracer_penalty(g2, fisher(f2, 0.0), 1.0), tracer_penalty(g, fisher(f, 0.0), 1.0)), 1e-8);
}

TEST(TracerGrad, QuadraticExample) {
    TracerConfig cfg = tracer_cfg(0.1, 0.1, 1e-300);
    const auto tg = tracer_grad(diag12(), Vector::Ones(2), DataBatch{}, fisher(vec({1.0, 1.0}), 1e-300), cfg);
    EXPECT_LE(oracle::rel_err(tg.augmented, vec({1.2, 2.8})), 1e-6);
}

TEST(TracerGrad, ZeroAtMinimumAndExactWhenRhoZero) {
    const auto fs = fisher(vec({1.0, 1.0}), 1e-3);
    EXPECT_EQ(tracer_grad(diag12(), Vector::Zero(2), DataBatch{}, fs, tracer_cfg(0.5, 0.1)).augmented, Vector::Zero(2));
    const Vector w = vec({0.3, -0.7});
    EXPECT_EQ(tracer_grad(diag12(), w, DataBatch{}, fs, tracer_cfg(0.0, 0.1)).augmented,
              gradient(diag12(), w, DataBatch{}));
}

TEST(TracerGrad, IdentityOnRandomQuadratics) {
    std::mt19937_64 gen(5);
    for (int k = 0; k < 10; ++k) {
        const Eigen::Index p = 3 + k;
        const Matrix a = oracle::random_spd(gen, p);
        const QuadraticModel m(a, oracle::random_vector(gen, p));
        const Vector w = oracle::random_vector(gen, p);
        const auto fs = fisher(oracle::random_vector(gen, p).cwiseAbs2(), 0.05);
        const double rho = 0.3;
        const Vector g = a * w - m.linear();
        const Vector want = 2.0 * rho * a * g.cwiseProduct(fs.inverse_damped());
        const auto tg = tracer_grad(m, w, DataBatch{}, fs, tracer_cfg(rho, 0.1, 0.05));
        EXPECT_LE(oracle::rel_err(Vector(tg.augmented - tg.gradient), want), 1e-6);
    }
}

TEST(TracerGrad, MatchesFiniteDifferencesOfFrozenAugmentedLoss) {
    Problem prob;
    const Vector w = prob.model.initialize(9);
    const auto fs = fisher(gradient(prob.model, w, prob.data).cwiseAbs2() + Vector::Constant(w.size(), 0.01), 0.01);
    const double rho = 0.05;
    const auto augmented = [&](const Vector& x) {
        return loss(prob.model, x, prob.data) + tracer_penalty(gradient(prob.model, x, prob.data), fs, rho);
    };
    const auto tg = tracer_grad(prob.model, w, prob.data, fs, tracer_cfg(rho, 0.1, 0.01));
    EXPECT_LE(oracle::rel_err(tg.augmented, oracle::fd_gradient(augmented, w, 1e-4)), 1e-3);
}

TEST(TracerStep, UsesFisherFromBeforeTheUpdate) {
    FisherState fs = fisher(vec({1.0, 1.0}), 1e-300, 0.5);
    MomentumState mom;
    Vector w = Vector::Ones(2);
    const auto cfg = tracer_cfg(0.1, 1.0, 1e-300);
    tracer_step(diag12(), w, DataBatch{}, fs, cfg, 0, mom);
    EXPECT_LE(oracle::rel_err(w, vec({1.0 - 1.2, 1.0 - 2.8})), 1e-6);
    EXPECT_EQ(fs.mean_sq, vec({1.0, 2.5}));
}

TEST(TracerStep, FirstCallInitializesFromGradient) {
    FisherState fs = FisherState::with_damping(0.5, 1e-3);
    MomentumState mom;
    Vector w = Vector::Ones(2);
    const auto stats = tracer_step(diag12(), w, DataBatch{}, fs, tracer_cfg(0.1, 0.1), 0, mom);
    EXPECT_EQ(fs.mean_sq, vec({1.0, 4.0}));
    EXPECT_NEAR(stats.penalty, 0.1 * (1.0 / 1.001 + 4.0 / 4.001), 1e-14);
}

TEST(TracerStep, NonFiniteUpdateNamesStepAndKeepsState) {
    FisherState fs = fisher(vec({1.0, 1.0}), 1e-3);
    MomentumState mom;
    Vector w = Vector::Ones(2);
    auto cfg = tracer_cfg(0.1, 1e308);
    try {
        tracer_step(diag12(), w, DataBatch{}, fs, cfg, 42, mom);
        FAIL();
    } catch (const NonFiniteError& e) {
        EXPECT_NE(std::string(e.what()).find("step 42"), std::string::npos);
    }
    EXPECT_EQ(w, Vector::Ones(2));
    EXPECT_EQ(fs.mean_sq, vec({1.0, 1.0}));
}

TEST(TracerStep, BiasBoundHoldsAlongTrajectory) {
    std::mt19937_64 gen(6);
    const Matrix a = oracle::random_spd(gen, 6, 0.5, 4.0);
    const QuadraticModel m(a, oracle::random_vector(gen, 6));
    const double norm_a = Eigen::SelfAdjointEigenSolver<Matrix>(a).eigenvalues().maxCoeff();
    const double rho = 0.01, delta = 0.1;
    const double kappa = 4.0 * (rho / delta) * (rho / delta) * norm_a * norm_a;
    auto cfg = tracer_cfg(rho, 0.05, delta);
    FisherState fs = cfg.make_fisher_state();
    Vector w = oracle::random_vector(gen, 6);
    for (int t = 0; t < 300; ++t) {
        const Vector g = gradient(m, w, DataBatch{});
        FisherState probe = fs;
        if (!probe.initialized) probe.initialize(g);
        const auto tg = tracer_grad(m, w, DataBatch{}, probe, cfg);
        const double bias = (tg.augmented - tg.gradient).squaredNorm();
        ASSERT_LE(bias, kappa * g.squaredNorm() * (1.0 + 1e-6) + 1e-20) << "step " << t;
        MomentumState mom;
        tracer_step(m, w, DataBatch{}, fs, cfg, static_cast<std::size_t>(t), mom);
    }
}

TEST(Reduction, RhoZeroIsBitwiseSgdAndAdam) {
    Problem prob;
    for (const std::string base : {"sgd", "momentum", "adam"}) {
        OptimizerSpec plain;
        plain.name = base;
        plain.schedule = {ScheduleKind::Cosine, 0.05, 300};
        plain.momentum = base == "momentum" ? 0.9 : 0.0;
        OptimizerSpec tr = plain;
        tr.name = base == "adam" ? "adam_tracer" : "sgd_tracer";
        tr.rho = 0.0;
        tr.delta = 1e-3;
        auto a = make_optimizer(plain);
        auto b = make_optimizer(tr);
        Vector wa = prob.model.initialize(1), wb = wa;
        for (std::size_t t = 0; t < 300; ++t) {
            const auto batch = prob.batch(t);
            a->step(prob.model, batch, wa, t);
            b->step(prob.model, batch, wb, t);
            ASSERT_EQ(wa, wb) << base << " diverged at step " << t;
        }
    }
}

TEST(Adam, SingleStepMatchesScalarTranscript) {
    AdamState st;
    Vector w = vec({1.0, -2.0});
    const Vector g = vec({0.5, -4.0});
    const AdamParams p;
    adam_update(w, g, g, 0.01, p, st);
    for (int i = 0; i < 2; ++i) {
        const double m = 0.1 * g(i);
        const double v = 0.001 * g(i) * g(i);
        const double mhat = m / 0.1;
        const double vhat = v / 0.001;
        const double want = (i == 0 ? 1.0 : -2.0) - 0.01 * mhat / (std::sqrt(vhat) + 1e-8);
        EXPECT_NEAR(w(i), want, 1e-15);
    }
}

TEST(AdamTracer, AliasModeFisherEqualsSecondMoment) {
    Problem prob;
    TracerConfig cfg = tracer_cfg(0.01, 0.01, 1e-3);
    cfg.alias_second_moment = true;
    cfg.beta = 0.999;
    FisherState fs = cfg.make_fisher_state();
    AdamState adam;
    Vector w = prob.model.initialize(2);
    for (std::size_t t = 0; t < 50; ++t) {
        const auto stats = adam_tracer_step(prob.model, w, prob.batch(t), fs, adam, cfg, t);
        ASSERT_EQ(fs.mean_sq, adam.v);
        if (t == 0) EXPECT_EQ(stats.penalty, 0.0);
    }
}

TEST(AdamTracer, SeparateEmaTracksRawGradient) {
    Problem prob;
    TracerConfig cfg = tracer_cfg(0.01, 0.01, 1e-3);
    FisherState fs = cfg.make_fisher_state();
    AdamState adam;
    Vector w = prob.model.initialize(2);
    const Vector g0 = gradient(prob.model, w, prob.batch(0));
    adam_tracer_step(prob.model, w, prob.batch(0), fs, adam, cfg, 0);
    EXPECT_LE(oracle::rel_err(fs.mean_sq, Vector(g0.cwiseAbs2())), 1e-15);
}

TEST(Sam, AnalyticPerturbation) {
    const auto m = QuadraticModel::diagonal(Vector::Ones(2), Vector::Zero(2));
    const auto sg = sam_gradient(m, vec({1.0, 0.0}), DataBatch{}, 0.1);
    EXPECT_LE(oracle::rel_err(sg.perturbed, vec({1.1, 0.0})), 1e-15);
    EXPECT_LE(oracle::rel_err(sg.sam_gradient, vec({1.1, 0.0})), 1e-15);
}

TEST(Sam, ZeroGradientDoesNotMove) {
    const auto m = QuadraticModel::diagonal(Vector::Ones(2), Vector::Zero(2));
    Vector w = Vector::Zero(2);
    MomentumState mom;
    sam_step(m, w, DataBatch{}, {0.1, {ScheduleKind::Constant, 0.5, 0}, 0.0}, 0, mom);
    EXPECT_EQ(w, Vector::Zero(2));
}

TEST(Sam, SmallRadiusApproachesSgd) {
    Problem prob;
    const Vector w = prob.model.initialize(3);
    const Vector g = gradient(prob.model, w, prob.data);
    double prev = 1e300;
    for (double r : {1e-2, 1e-3, 1e-4}) {
        const double err = (sam_gradient(prob.model, w, prob.data, r).sam_gradient - g).norm();
        EXPECT_LT(err, prev);
        EXPECT_LE(err, 50.0 * r * g.norm());
        prev = err;
    }
    EXPECT_THROW(sam_gradient(prob.model, w, prob.data, 0.0), TracerError);
}

TEST(Schedule, CosineAndConstant) {
    const LrSchedule c{ScheduleKind::Cosine, 0.1, 100};
    EXPECT_DOUBLE_EQ(c.at(0), 0.1);
    EXPECT_NEAR(c.at(50), 0.05, 1e-16);
    EXPECT_NEAR(c.at(25), 0.1 * 0.5 * (1.0 + std::cos(std::numbers::pi / 4.0)), 1e-16);
    EXPECT_EQ(c.at(100), 0.0);
    EXPECT_EQ(c.at(1000), 0.0);
    const LrSchedule k{ScheduleKind::Constant, 0.3, 0};
    EXPECT_EQ(k.at(12345), 0.3);
    EXPECT_THROW(parse_schedule_kind("linear"), TracerError);
}

TEST(Momentum, HeavyBallRecursion) {
    Vector w = vec({1.0});
    MomentumState st;
    sgd_update(w, vec({1.0}), 0.1, 0.5, st);
    sgd_update(w, vec({1.0}), 0.1, 0.5, st);
    EXPECT_NEAR(w(0), 1.0 - 0.1 - 0.1 * 1.5, 1e-15);
}

TEST(Registry, EnumeratesAllSixWithOneInterface) {
    const auto names = optimizer_names();
    ASSERT_EQ(names.size(), 6u);
    const auto m = QuadraticModel::diagonal(vec({1.0, 3.0}), vec({1.0, -1.0}));
    for (auto name : names) {
        OptimizerSpec spec;
        spec.name = std::string(name);
        spec.schedule = {ScheduleKind::Constant, name.find("adam") != std::string_view::npos ? 0.05 : 0.1, 0};
        spec.momentum = name == "momentum" ? 0.5 : 0.0;
        spec.rho = 0.01;
        spec.delta = 1.0;
        auto opt = make_optimizer(spec);
        EXPECT_EQ(opt->name(), name);
        Vector w = Vector::Zero(2);
        const double before = m.value(w);
        for (std::size_t t = 0; t < 200; ++t) opt->step(m, DataBatch{}, w, t);
        EXPECT_LT(m.value(w), before - 0.5) << name;
    }
    OptimizerSpec bad;
    bad.name = "lbfgs";
    EXPECT_THROW(make_optimizer(bad), TracerError);
}

TEST(Registry, ValidatesHyperparameters) {
    OptimizerSpec spec;
    spec.name = "sgd_tracer";
    spec.rho = -1.0;
    EXPECT_THROW(make_optimizer(spec), TracerError);
    spec.rho = 0.1;
    spec.beta = 0.0;
    EXPECT_THROW(make_optimizer(spec), TracerError);
    spec.beta = 0.5;
    spec.delta = 0.0;
    EXPECT_THROW(make_optimizer(spec), TracerError);
    spec.name = "sam";
    spec.rho_sam = 0.0;
    EXPECT_THROW(make_optimizer(spec), TracerError);
}
