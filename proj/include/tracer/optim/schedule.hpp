#pragma once

#include <cstddef>
#include <string>

namespace tracer {

enum class ScheduleKind { Constant, Cosine };

/// Step size alpha_t. Cosine: alpha_0 * (1 + cos(pi * t / T)) / 2 over T total
/// steps, held at 0 once t >= T.
struct LrSchedule {
    ScheduleKind kind = ScheduleKind::Constant;
    double base = 0.1;
    std::size_t total_steps = 0;

    double at(std::size_t t) const;
};

ScheduleKind parse_schedule_kind(const std::string& name);
std::string to_string(ScheduleKind kind);

}  // namespace tracer
