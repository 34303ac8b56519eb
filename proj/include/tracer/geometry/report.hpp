#pragma once

#include "tracer/geometry/flatness.hpp"
#include "tracer/geometry/laplace.hpp"

#include <json.hpp>

#include <optional>
#include <string>

namespace tracer::geometry {

nlohmann::json to_json(const TraceEstimate& t);
nlohmann::json to_json(const LaplaceSummary& s);
nlohmann::json to_json(const FlatnessProfile& profile);
nlohmann::json to_json(const MixtureWeights& m);

/// One diagnostics record for a trained point.
struct DiagnosticsRecord {
    std::string mode_id;
    double loss = 0.0;
    double gradient_norm = 0.0;
    TraceEstimate trace;
    double fisher_trace_gm = 0.0;
    double fisher_trace_per_example = 0.0;
    std::optional<LaplaceSummary> laplace;
    std::optional<std::string> laplace_error;
    FlatnessProfile profile;
};

nlohmann::json to_json(const DiagnosticsRecord& r);

}  // namespace tracer::geometry
