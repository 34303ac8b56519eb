#include "tracer/optim/schedule.hpp"

#include "tracer/core/types.hpp"

#include <cmath>
#include <numbers>

namespace tracer {

double LrSchedule::at(std::size_t t) const {
    if (kind == ScheduleKind::Constant) return base;
    require(total_steps > 0, "cosine schedule needs total_steps > 0");
    if (t >= total_steps) return 0.0;
    const double frac = static_cast<double>(t) / static_cast<double>(total_steps);
    return base * 0.5 * (1.0 + std::cos(std::numbers::pi * frac));
}

ScheduleKind parse_schedule_kind(const std::string& name) {
    if (name == "constant") return ScheduleKind::Constant;
    if (name == "cosine") return ScheduleKind::Cosine;
    throw TracerError("unknown learning-rate schedule '" + name + "'");
}

std::string to_string(ScheduleKind kind) {
    return kind == ScheduleKind::Constant ? "constant" : "cosine";
}

}  // namespace tracer
