#include "tracer/harness/runner.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <sstream>

namespace {

std::vector<double> parse_values(const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        std::size_t used = 0;
        const double v = std::stod(item, &used);
        if (used != item.size()) throw tracer::TracerError("bad value in --values: '" + item + "'");
        out.push_back(v);
    }
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    using namespace tracer::harness;
    CLI::App app{"Curvature-regularized training experiments"};
    app.require_subcommand(1);

    std::string config_path, param, values, checkpoint;
    std::vector<std::string> runs;
    DiagnoseOptions diag;

    auto* train = app.add_subcommand("train", "Train every replicate seed of a config");
    train->add_option("--config", config_path, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);

    auto* sweep_cmd = app.add_subcommand("sweep", "Repeat a run set over values of one hyperparameter");
    sweep_cmd->add_option("--config", config_path, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
    sweep_cmd->add_option("--param", param, "rho | rho_sam | lr | beta | delta")->required();
    sweep_cmd->add_option("--values", values, "Comma-separated values")->required();

    auto* diagnose_cmd = app.add_subcommand("diagnose", "Geometry diagnostics at a checkpoint");
    diagnose_cmd->add_option("--config", config_path, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
    diagnose_cmd->add_option("--checkpoint", checkpoint, "checkpoint.bin")->required()->check(CLI::ExistingFile);
    diagnose_cmd->add_option("--probes", diag.probes, "Hutchinson probes")->capture_default_str();
    diagnose_cmd->add_option("--directions", diag.directions, "Random directions per radius")->capture_default_str();
    diagnose_cmd->add_option("--seed", diag.seed, "Probe and direction seed")->capture_default_str();

    auto* compare_cmd = app.add_subcommand("compare", "Joint accuracy table over run directories");
    compare_cmd->add_option("--runs", runs, "Run directories containing summary.json")->required()->expected(1, -1);

    CLI11_PARSE(app, argc, argv);

    try {
        if (*train) {
            const auto summary = run(load_config(config_path));
            std::cout << summary.json.dump(2) << "\n";
            return summary.all_ok ? 0 : 1;
        }
        if (*sweep_cmd) {
            const auto rows = sweep(load_config(config_path), param, parse_values(values));
            std::size_t failed = 0;
            std::cout << "value,mean_test_accuracy,stderr_test_accuracy,n,failed\n";
            for (const auto& r : rows) {
                std::cout << r.value << "," << r.test_accuracy.mean << "," << r.test_accuracy.std_error << ","
                          << r.test_accuracy.n << "," << r.failed << "\n";
                failed += r.failed;
            }
            return failed == 0 ? 0 : 1;
        }
        if (*diagnose_cmd) {
            std::cout << diagnose(load_config(config_path), checkpoint, diag).dump(2) << "\n";
            return 0;
        }
        if (*compare_cmd) {
            std::cout << compare(runs);
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
