#include "tracer/harness/metrics.hpp"

#include "tracer/core/types.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace tracer::harness {

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

namespace {

std::string optional_field(const std::optional<double>& v) { return v ? format_double(*v) : std::string(); }

bool row_finite(const MetricsRow& r) {
    for (double v : {r.train_loss, r.test_loss, r.penalty, r.grad_norm, r.fisher_trace}) {
        if (!std::isfinite(v)) return false;
    }
    for (const auto& v : {r.train_accuracy, r.val_accuracy, r.test_accuracy}) {
        if (v && !std::isfinite(*v)) return false;
    }
    return true;
}

std::optional<double> parse_optional(const std::string& s) {
    if (s.empty()) return std::nullopt;
    return std::stod(s);
}

}  // namespace

std::string to_csv_line(const MetricsRow& r) {
    std::string line = std::to_string(r.step) + "," + std::to_string(r.epoch) + "," + format_double(r.train_loss) +
                       "," + optional_field(r.train_accuracy) + "," + optional_field(r.val_accuracy) + "," +
                       format_double(r.test_loss) + "," + optional_field(r.test_accuracy) + "," +
                       format_double(r.penalty) + "," + format_double(r.grad_norm) + "," +
                       format_double(r.fisher_trace);
    return line;
}

void write_metrics_csv(const std::filesystem::path& path, const std::vector<MetricsRow>& rows) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw TracerError("cannot write " + path.string());
    out << kMetricsHeader << '\n';
    std::size_t last_step = 0;
    for (std::size_t k = 0; k < rows.size(); ++k) {
        require(k == 0 || rows[k].step > last_step, "metrics rows must be strictly increasing in step");
        require(row_finite(rows[k]), "metrics row at step " + std::to_string(rows[k].step) + " is not finite");
        last_step = rows[k].step;
        out << to_csv_line(rows[k]) << '\n';
    }
}

std::vector<MetricsRow> read_metrics_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw TracerError("cannot read " + path.string());
    std::string line;
    std::getline(in, line);
    if (line != kMetricsHeader) throw TracerError("unexpected metrics header in " + path.string());
    std::vector<MetricsRow> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> f;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) f.push_back(cell);
        if (!line.empty() && line.back() == ',') f.emplace_back();
        if (f.size() != 10) throw TracerError("malformed metrics row in " + path.string());
        MetricsRow r;
        r.step = std::stoul(f[0]);
        r.epoch = std::stoul(f[1]);
        r.train_loss = std::stod(f[2]);
        r.train_accuracy = parse_optional(f[3]);
        r.val_accuracy = parse_optional(f[4]);
        r.test_loss = std::stod(f[5]);
        r.test_accuracy = parse_optional(f[6]);
        r.penalty = std::stod(f[7]);
        r.grad_norm = std::stod(f[8]);
        r.fisher_trace = std::stod(f[9]);
        rows.push_back(r);
    }
    return rows;
}

MeanStdErr mean_std_error(const std::vector<double>& values) {
    MeanStdErr out;
    out.n = values.size();
    if (values.empty()) return out;
    double sum = 0.0;
    for (double v : values) sum += v;
    out.mean = sum / static_cast<double>(values.size());
    if (values.size() > 1) {
        double ss = 0.0;
        for (double v : values) ss += (v - out.mean) * (v - out.mean);
        const double sd = std::sqrt(ss / static_cast<double>(values.size() - 1));
        out.std_error = sd / std::sqrt(static_cast<double>(values.size()));
    }
    return out;
}

}  // namespace tracer::harness
