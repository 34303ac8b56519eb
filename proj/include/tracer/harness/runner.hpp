#pragma once

#include "tracer/harness/config.hpp"
#include "tracer/harness/datasets.hpp"
#include "tracer/harness/metrics.hpp"

#include <json.hpp>

#include <memory>
#include <string>
#include <vector>

namespace tracer::harness {

/// Model named by a spec, sized for a dataset's feature and class counts.
std::unique_ptr<Model> build_model(const ModelSpec& spec, const DataBatch& train);

/// Initial parameters for a replicate seed: Glorot-uniform for networks,
/// zero for quadratics.
ParamVector initial_params(const Model& model, std::uint64_t seed);

struct RunResult {
    std::uint64_t seed = 0;
    bool ok = true;
    std::string error;
    std::vector<MetricsRow> rows;
    std::vector<double> epoch_seconds;
    ParamVector params;
};

/// Trains one replicate in memory. Divergence (a non-finite loss or update)
/// ends the run with ok == false; rows recorded before it are kept.
RunResult train_replicate(const ExperimentConfig& cfg, const Dataset& data, const Model& model, std::uint64_t seed);

struct RunSetSummary {
    nlohmann::json json;
    bool all_ok = true;
};

/// Trains every replicate seed (concurrently, capped by TRACER_THREADS) and
/// writes <output_dir>/seed_<s>/{metrics.csv, timing.csv, checkpoint.bin,
/// checkpoint.bin.json}, <output_dir>/config.json and <output_dir>/summary.json.
RunSetSummary run(const ExperimentConfig& cfg);

/// Summary JSON over replicate results (failed runs are listed, never averaged).
nlohmann::json summarize(const ExperimentConfig& cfg, const std::vector<RunResult>& results);

struct SweepRow {
    double value = 0.0;
    MeanStdErr test_accuracy;
    MeanStdErr val_accuracy;
    std::size_t failed = 0;
    std::string directory;
};

/// One run set per value under <output_dir>/<param>_<k>/, plus
/// <output_dir>/sweep.csv with columns
/// value,mean_test_accuracy,stderr_test_accuracy,mean_val_accuracy,stderr_val_accuracy,n,failed.
std::vector<SweepRow> sweep(const ExperimentConfig& cfg, const std::string& parameter, const std::vector<double>& values);

/// Joint table of final test accuracy (mean, standard error, n) across run
/// directories, one CSV row per directory.
std::string compare(const std::vector<std::string>& run_dirs);

/// Geometry diagnostics at a checkpoint, evaluated on the training split.
struct DiagnoseOptions {
    std::size_t probes = 100;
    std::size_t directions = 500;
    std::vector<double> radii = {0.0, 0.01, 0.02, 0.05, 0.1};
    std::uint64_t seed = 0;
};

nlohmann::json diagnose(const ExperimentConfig& cfg, const std::string& checkpoint, const DiagnoseOptions& options = {});

}  // namespace tracer::harness
