#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace tracer::harness {

/// One per-epoch row of a run's metrics.csv. Accuracies are absent for
/// regression-style models and validation accuracy when there is no
/// validation split; absent values are written as empty fields.
struct MetricsRow {
    std::size_t step = 0;
    std::size_t epoch = 0;
    double train_loss = 0.0;
    std::optional<double> train_accuracy;
    std::optional<double> val_accuracy;
    double test_loss = 0.0;
    std::optional<double> test_accuracy;
    double penalty = 0.0;       ///< mean monitored TRACER penalty over the epoch
    double grad_norm = 0.0;     ///< mean batch-gradient norm over the epoch
    double fisher_trace = 0.0;  ///< sum of the monitored f_bar at epoch end
};

inline constexpr const char* kMetricsHeader =
    "step,epoch,train_loss,train_accuracy,val_accuracy,test_loss,test_accuracy,penalty,grad_norm,fisher_trace";

/// Round-trip exact decimal ("%.17g").
std::string format_double(double v);

std::string to_csv_line(const MetricsRow& row);
void write_metrics_csv(const std::filesystem::path& path, const std::vector<MetricsRow>& rows);
std::vector<MetricsRow> read_metrics_csv(const std::filesystem::path& path);

/// Sample mean and standard error (sample std / sqrt(n)) of a set of values.
struct MeanStdErr {
    double mean = 0.0;
    double std_error = 0.0;
    std::size_t n = 0;
};

MeanStdErr mean_std_error(const std::vector<double>& values);

}  // namespace tracer::harness
