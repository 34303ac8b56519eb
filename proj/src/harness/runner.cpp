#include "tracer/harness/runner.hpp"

#include "tracer/autodiff/differentiate.hpp"
#include "tracer/core/rng.hpp"
#include "tracer/geometry/fisher_diag.hpp"
#include "tracer/geometry/report.hpp"
#include "tracer/harness/checkpoint.hpp"
#include "tracer/models/quadratic.hpp"
#include "tracer/parallel/kernels.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <sstream>

namespace tracer::harness {

namespace fs = std::filesystem;

std::unique_ptr<Model> build_model(const ModelSpec& spec, const DataBatch& train) {
    const auto features = static_cast<int>(train.features());
    if (spec.kind == "quadratic") {
        const Vector diag = Eigen::Map<const Vector>(spec.diag.data(), static_cast<Eigen::Index>(spec.diag.size()));
        const Vector b = Eigen::Map<const Vector>(spec.b.data(), static_cast<Eigen::Index>(spec.b.size()));
        return std::make_unique<QuadraticModel>(QuadraticModel::diagonal(diag, b, spec.c));
    }
    require(train.is_classification(), "model '" + spec.kind + "' needs a classification dataset");
    if (spec.kind == "logistic") {
        return std::make_unique<MlpModel>(make_logistic_regression(features, train.num_classes));
    }
    std::vector<int> sizes{features};
    sizes.insert(sizes.end(), spec.hidden.begin(), spec.hidden.end());
    sizes.push_back(train.num_classes);
    return std::make_unique<MlpModel>(std::move(sizes), spec.activation, Head::Classification);
}

ParamVector initial_params(const Model& model, std::uint64_t seed) {
    if (const auto* mlp = dynamic_cast<const MlpModel*>(&model)) return mlp->initialize(seed);
    return ParamVector::Zero(static_cast<Eigen::Index>(model.num_params()));
}

namespace {

std::size_t steps_per_epoch(std::size_t n, std::size_t batch) { return (n + batch - 1) / batch; }

FisherState monitor_state(const OptimizerSpec& spec) {
    return spec.delta ? FisherState::with_damping(spec.beta, *spec.delta) : FisherState::with_auto_damping(spec.beta);
}

}  // namespace

RunResult train_replicate(const ExperimentConfig& cfg, const Dataset& data, const Model& model, std::uint64_t seed) {
    RunResult result;
    result.seed = seed;
    const auto* mlp = dynamic_cast<const MlpModel*>(&model);
    const bool classify = mlp != nullptr && mlp->head() == Head::Classification;
    const std::size_t n = data.train.size();
    const std::size_t per_epoch = steps_per_epoch(n, cfg.batch_size);

    OptimizerSpec spec = cfg.optimizer;
    spec.schedule.total_steps = per_epoch * cfg.epochs;
    auto optimizer = make_optimizer(spec);
    FisherState monitor = monitor_state(spec);

    ParamVector w = initial_params(model, seed);
    std::size_t step = 0;
    try {
        for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
            const auto started = std::chrono::steady_clock::now();
            CounterRng shuffle(derive_seed(seed, Purpose::Shuffle, epoch));
            const auto order = permutation(n, shuffle);
            double penalty_sum = 0.0;
            double grad_norm_sum = 0.0;
            for (std::size_t k = 0; k < per_epoch; ++k) {
                const std::size_t begin = k * cfg.batch_size;
                const std::size_t end = std::min(n, begin + cfg.batch_size);
                const DataBatch batch = data.train.select(std::span<const std::size_t>(order).subspan(begin, end - begin));
                const StepStats stats = optimizer->step(model, batch, w, step);
                if (!monitor.initialized) monitor.initialize(stats.gradient);
                penalty_sum += spec.rho == 0.0 ? 0.0 : tracer_penalty(stats.gradient, monitor, spec.rho);
                monitor.update(stats.gradient);
                grad_norm_sum += stats.grad_norm;
                ++step;
            }

            MetricsRow row;
            row.step = step;
            row.epoch = epoch + 1;
            row.train_loss = loss(model, w, data.train);
            row.test_loss = data.test.size() > 0 || !classify ? loss(model, w, data.test) : 0.0;
            if (classify) {
                row.train_accuracy = mlp->accuracy(view(w), data.train);
                if (data.val.size() > 0) row.val_accuracy = mlp->accuracy(view(w), data.val);
                row.test_accuracy = mlp->accuracy(view(w), data.test);
            }
            row.penalty = penalty_sum / static_cast<double>(per_epoch);
            row.grad_norm = grad_norm_sum / static_cast<double>(per_epoch);
            row.fisher_trace = monitor.trace();
            if (!std::isfinite(row.train_loss) || !std::isfinite(row.test_loss) || !std::isfinite(row.penalty) ||
                !std::isfinite(row.grad_norm) || !std::isfinite(row.fisher_trace)) {
                throw NonFiniteError("non-finite metrics at epoch " + std::to_string(epoch + 1));
            }
            result.rows.push_back(row);
            result.epoch_seconds.push_back(
                std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count());
        }
    } catch (const NonFiniteError& e) {
        result.ok = false;
        result.error = e.what();
    }
    result.params = std::move(w);
    return result;
}

namespace {

nlohmann::json stat_json(const MeanStdErr& m) {
    return {{"mean", m.mean}, {"std_error", m.std_error}, {"n", m.n}};
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw TracerError("cannot write " + path.string());
    out << text;
}

void write_run_directory(const ExperimentConfig& cfg, const fs::path& dir, const RunResult& r) {
    fs::create_directories(dir);
    write_metrics_csv(dir / "metrics.csv", r.rows);
    std::string timing = "epoch,seconds\n";
    for (std::size_t k = 0; k < r.epoch_seconds.size(); ++k) {
        timing += std::to_string(k + 1) + "," + format_double(r.epoch_seconds[k]) + "\n";
    }
    write_text(dir / "timing.csv", timing);
    if (r.ok) {
        write_checkpoint(dir / "checkpoint.bin", r.params,
                         {{"model", to_json(cfg.model)}, {"seed", r.seed}, {"optimizer", cfg.optimizer.name}});
    }
}

}  // namespace

nlohmann::json summarize(const ExperimentConfig& cfg, const std::vector<RunResult>& results) {
    std::vector<double> final_test, best_test, final_val, final_train_loss, final_grad;
    nlohmann::json runs = nlohmann::json::array();
    std::size_t failed = 0;
    for (const auto& r : results) {
        nlohmann::json j{{"seed", r.seed}, {"status", r.ok ? "ok" : "failed"}, {"epochs", r.rows.size()}};
        if (!r.ok) {
            ++failed;
            j["error"] = r.error;
            runs.push_back(j);
            continue;
        }
        const auto& last = r.rows.back();
        j["final_train_loss"] = last.train_loss;
        j["final_test_loss"] = last.test_loss;
        j["final_grad_norm"] = last.grad_norm;
        final_train_loss.push_back(last.train_loss);
        final_grad.push_back(last.grad_norm);
        if (last.test_accuracy) {
            double best = 0.0;
            for (const auto& row : r.rows) best = std::max(best, *row.test_accuracy);
            j["final_test_accuracy"] = *last.test_accuracy;
            j["best_test_accuracy"] = best;
            final_test.push_back(*last.test_accuracy);
            best_test.push_back(best);
        }
        if (last.val_accuracy) {
            j["final_val_accuracy"] = *last.val_accuracy;
            final_val.push_back(*last.val_accuracy);
        }
        runs.push_back(j);
    }
    nlohmann::json s{{"schema_version", kSchemaVersion},
                     {"optimizer", cfg.optimizer.name},
                     {"n", results.size()},
                     {"n_failed", failed},
                     {"runs", runs},
                     {"final_train_loss", stat_json(mean_std_error(final_train_loss))},
                     {"final_grad_norm", stat_json(mean_std_error(final_grad))}};
    if (!final_test.empty()) {
        s["final_test_accuracy"] = stat_json(mean_std_error(final_test));
        s["best_test_accuracy"] = stat_json(mean_std_error(best_test));
    }
    if (!final_val.empty()) s["final_val_accuracy"] = stat_json(mean_std_error(final_val));
    return s;
}

RunSetSummary run(const ExperimentConfig& cfg) {
    cfg.validate();
    const Dataset data = make_dataset(cfg.dataset);
    const auto model = build_model(cfg.model, data.train);
    std::vector<RunResult> results(cfg.seeds.size());
    parallel::for_each_task(
        cfg.seeds.size(), [&](std::size_t k) { results[k] = train_replicate(cfg, data, *model, cfg.seeds[k]); },
        parallel::thread_budget());

    const fs::path root(cfg.output_dir);
    fs::create_directories(root);
    write_text(root / "config.json", to_json(cfg).dump(2) + "\n");
    for (const auto& r : results) write_run_directory(cfg, root / ("seed_" + std::to_string(r.seed)), r);

    RunSetSummary out;
    out.json = summarize(cfg, results);
    out.all_ok = out.json["n_failed"].get<std::size_t>() == 0;
    write_text(root / "summary.json", out.json.dump(2) + "\n");
    return out;
}

namespace {

MeanStdErr read_stat(const nlohmann::json& summary, const char* key) {
    MeanStdErr m;
    if (!summary.contains(key)) return m;
    const auto& j = summary.at(key);
    m.mean = j.at("mean").get<double>();
    m.std_error = j.at("std_error").get<double>();
    m.n = j.at("n").get<std::size_t>();
    return m;
}

}  // namespace

std::vector<SweepRow> sweep(const ExperimentConfig& cfg, const std::string& parameter, const std::vector<double>& values) {
    require(!values.empty(), "sweep: empty value list");
    require(is_sweep_parameter(parameter), "sweep: unknown parameter '" + parameter + "'");
    std::vector<SweepRow> rows;
    std::string table = "value,mean_test_accuracy,stderr_test_accuracy,mean_val_accuracy,stderr_val_accuracy,n,failed\n";
    for (std::size_t k = 0; k < values.size(); ++k) {
        ExperimentConfig point = with_parameter(cfg, parameter, values[k]);
        point.output_dir = (fs::path(cfg.output_dir) / (parameter + "_" + std::to_string(k))).string();
        const auto summary = run(point);
        SweepRow row;
        row.value = values[k];
        row.test_accuracy = read_stat(summary.json, "final_test_accuracy");
        row.val_accuracy = read_stat(summary.json, "final_val_accuracy");
        row.failed = summary.json["n_failed"].get<std::size_t>();
        row.directory = point.output_dir;
        table += format_double(row.value) + "," + format_double(row.test_accuracy.mean) + "," +
                 format_double(row.test_accuracy.std_error) + "," + format_double(row.val_accuracy.mean) + "," +
                 format_double(row.val_accuracy.std_error) + "," + std::to_string(row.test_accuracy.n) + "," +
                 std::to_string(row.failed) + "\n";
        rows.push_back(row);
    }
    fs::create_directories(cfg.output_dir);
    write_text(fs::path(cfg.output_dir) / "sweep.csv", table);
    return rows;
}

std::string compare(const std::vector<std::string>& run_dirs) {
    require(!run_dirs.empty(), "compare: no run directories given");
    std::string table = "run,optimizer,mean_test_accuracy,stderr_test_accuracy,n,failed\n";
    for (const auto& dir : run_dirs) {
        std::ifstream in(fs::path(dir) / "summary.json");
        if (!in) throw TracerError("compare: no summary.json in " + dir);
        nlohmann::json s;
        in >> s;
        const auto acc = read_stat(s, "final_test_accuracy");
        table += dir + "," + s.at("optimizer").get<std::string>() + "," + format_double(acc.mean) + "," +
                 format_double(acc.std_error) + "," + std::to_string(acc.n) + "," +
                 std::to_string(s.at("n_failed").get<std::size_t>()) + "\n";
    }
    return table;
}

nlohmann::json diagnose(const ExperimentConfig& cfg, const std::string& checkpoint, const DiagnoseOptions& options) {
    const Dataset data = make_dataset(cfg.dataset);
    const auto model = build_model(cfg.model, data.train);
    const Checkpoint ck = read_checkpoint(checkpoint);
    require(static_cast<std::size_t>(ck.params.size()) == model->num_params(),
            "diagnose: checkpoint length does not match the model");
    const ParamVector& w = ck.params;

    geometry::DiagnosticsRecord rec;
    rec.mode_id = fs::path(checkpoint).parent_path().filename().string();
    const auto lg = loss_and_gradient(*model, w, data.train);
    rec.loss = lg.loss;
    rec.gradient_norm = lg.gradient.norm();
    const auto oracle = geometry::make_hvp_oracle(*model, w, data.train);
    rec.trace = geometry::hutchinson_trace(oracle, w.size(), options.probes, options.seed);
    rec.fisher_trace_gm = geometry::empirical_fisher_diag(*model, w, data.train).sum();
    rec.fisher_trace_per_example =
        geometry::empirical_fisher_diag(*model, w, data.train, geometry::FisherMode::PerExample).sum();
    geometry::FlatnessOptions fo;
    fo.radii = options.radii;
    fo.n_dirs = options.directions;
    fo.seed = options.seed;
    fo.trace_probes = options.probes;
    rec.profile = geometry::perturbation_flatness_profile(
        [&](const ParamVector& x) { return loss(*model, x, data.train); }, w, oracle, fo);
    try {
        rec.laplace = geometry::laplace_log_evidence(w, lg.loss, rec.gradient_norm, oracle);
    } catch (const TracerError& e) {
        rec.laplace_error = e.what();
    }
    return geometry::to_json(rec);
}

}  // namespace tracer::harness
