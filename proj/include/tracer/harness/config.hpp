#pragma once

#include "tracer/models/mlp.hpp"
#include "tracer/optim/registry.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace tracer::harness {

inline constexpr int kSchemaVersion = 1;

struct DatasetSpec {
    std::string name;  ///< two_moons | gaussian_blobs | xor | idx_file
    std::size_t n_train = 0;
    std::size_t n_val = 0;
    std::size_t n_test = 0;
    double noise = 0.0;          ///< input jitter (std of Gaussian noise)
    double flip_fraction = 0.0;  ///< applied to train and validation labels only
    int classes = 2;
    std::uint64_t seed = 0;
    std::string images;          ///< idx_file only
    std::string labels;          ///< idx_file only
};

struct ModelSpec {
    std::string kind;            ///< mlp | logistic | quadratic
    std::vector<int> hidden;
    Activation activation = Activation::Relu;
    std::vector<double> diag;    ///< quadratic: diagonal of A
    std::vector<double> b;       ///< quadratic: linear term
    double c = 0.0;
};

struct ExperimentConfig {
    DatasetSpec dataset;
    ModelSpec model;
    OptimizerSpec optimizer;
    std::size_t epochs = 0;
    std::size_t batch_size = 0;
    std::string output_dir;
    std::vector<std::uint64_t> seeds;

    void validate() const;
};

/// Strict parser: unknown keys are rejected, and tracer optimizers must
/// state rho, beta and delta ("auto" selects the automatic damping rule).
ExperimentConfig parse_config(const nlohmann::json& j);
ExperimentConfig load_config(const std::filesystem::path& path);
nlohmann::json to_json(const ExperimentConfig& cfg);
nlohmann::json to_json(const ModelSpec& spec);
ModelSpec parse_model_spec(const nlohmann::json& j);

/// Sweepable parameters: rho, rho_sam, lr, beta, delta.
bool is_sweep_parameter(const std::string& name);
ExperimentConfig with_parameter(ExperimentConfig cfg, const std::string& name, double value);

}  // namespace tracer::harness
