// Serial reference vs OpenMP for the data-parallel kernels (range 0 = serial,
// 1 = OpenMP).

#include "tracer/geometry/fisher_diag.hpp"
#include "tracer/geometry/hutchinson.hpp"
#include "tracer/models/mlp.hpp"
#include "tracer/models/quadratic.hpp"
#include "tracer/vi/oracle.hpp"

#include <benchmark/benchmark.h>

#include <random>

using namespace tracer;

namespace {

parallel::Exec exec_of(const benchmark::State& state) {
    return state.range(0) == 0 ? parallel::Exec::Serial : parallel::Exec::OpenMP;
}

Matrix spd(Eigen::Index n, std::uint64_t seed) {
    std::mt19937_64 gen(seed);
    std::normal_distribution<double> nd;
    Matrix g(n, n);
    for (Eigen::Index i = 0; i < g.size(); ++i) g.data()[i] = nd(gen);
    return g * g.transpose() / static_cast<double>(n) + Matrix::Identity(n, n);
}

DataBatch moons_like(int n, std::uint64_t seed) {
    std::mt19937_64 gen(seed);
    std::normal_distribution<double> nd;
    DataBatch b;
    b.inputs = Matrix(n, 2);
    b.num_classes = 2;
    for (int i = 0; i < n; ++i) {
        b.inputs(i, 0) = nd(gen);
        b.inputs(i, 1) = nd(gen);
        b.labels.push_back(b.inputs(i, 0) * b.inputs(i, 1) > 0 ? 1 : 0);
    }
    return b;
}

void BM_Hutchinson(benchmark::State& state) {
    const QuadraticModel model(spd(200, 1), Vector::Zero(200));
    const auto oracle = geometry::make_hvp_oracle(model, Vector::Zero(200), DataBatch{});
    for (auto _ : state) {
        benchmark::DoNotOptimize(geometry::hutchinson_trace(oracle, 200, 2000, 7, exec_of(state)).estimate);
    }
}

void BM_MonteCarloExpectedLoss(benchmark::State& state) {
    const QuadraticModel model(spd(20, 2), Vector::Ones(20));
    const vi::GaussianVariational q{Vector::Zero(20), spd(20, 3)};
    for (auto _ : state) {
        benchmark::DoNotOptimize(vi::monte_carlo_expected_loss(model, q, 200000, 11, exec_of(state)).mean);
    }
}

void BM_PerExampleFisher(benchmark::State& state) {
    const MlpModel model({2, 64, 64, 2}, Activation::Relu, Head::Classification);
    const DataBatch batch = moons_like(2000, 4);
    const ParamVector w = model.initialize(5);
    for (auto _ : state) {
        benchmark::DoNotOptimize(
            geometry::empirical_fisher_diag(model, w, batch, geometry::FisherMode::PerExample, exec_of(state)).sum());
    }
}

}  // namespace

BENCHMARK(BM_Hutchinson)->ArgName("openmp")->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_MonteCarloExpectedLoss)->ArgName("openmp")->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_PerExampleFisher)->ArgName("openmp")->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
