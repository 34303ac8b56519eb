#pragma once

#include "tracer/core/types.hpp"

#include <json.hpp>

#include <filesystem>

namespace tracer::harness {

/// Parameters as raw little-endian IEEE-754 doubles in `path`, with a JSON
/// sidecar at `path` + ".json" holding {model, p, seed, ...}.
struct Checkpoint {
    ParamVector params;
    nlohmann::json sidecar;
};

std::filesystem::path sidecar_path(const std::filesystem::path& path);

void write_checkpoint(const std::filesystem::path& path, const ParamVector& params, nlohmann::json sidecar);
Checkpoint read_checkpoint(const std::filesystem::path& path);

}  // namespace tracer::harness
