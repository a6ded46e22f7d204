// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <limits>
#include <vector>

#include "rough/geometry.hpp"

namespace rough {

namespace tol {
inline constexpr double tangency = 1e-9;   ///< |<dir, normal>| below this is grazing
inline constexpr double endpoint = 1e-11;  ///< hits this close to a corner are singular
inline constexpr double residual = 1e-12;  ///< intersection residual after polishing
}  // namespace tol

struct Limits {
    std::size_t max_bounces = 1'000'000;
    double max_time = std::numeric_limits<double>::infinity();
};

enum class Status { returned, singular, capped };
const char* status_name(Status s) noexcept;

struct Event {
    Vec2 position;
    Vec2 incoming;
    Vec2 outgoing;
    int segment = -1;
    int period = 0;
    double flight_time = 0.0;
};

struct TrajectoryLog {
    std::vector<Event> events;
    Status terminal = Status::singular;
    Vec2 exit_position;   ///< where the ray re-crossed the interface line
    Vec2 exit_direction;
    double total_time = 0.0;
};

/// Interface state: position x on the line and angle theta in (0, pi). The
/// incoming velocity points at angle pi + theta.
struct ReflState {
    double x = 0.0;
    double theta = 0.0;
};

struct MacroResult {
    ReflState out;
    Status status = Status::singular;
    std::size_t bounces = 0;
    double time = 0.0;
};

/// dir - 2 <dir, normal> normal. Throws Error(NotIncoming) if <dir, normal> >= 0.
Vec2 reflect(Vec2 dir, Vec2 normal);

/// Ray traces from pos along dir (unit speed) until the ray crosses the
/// wall's top line upward, a limit is hit, or the motion is singular.
TrajectoryLog trace(const Wall& wall, Vec2 pos, Vec2 dir, const Limits& limits = {});

/// The macro-reflection map of a half-plane-datum wall.
MacroResult macro_reflection(const Wall& wall, ReflState s, const Limits& limits = {});

/// Same as trace but only reports the exit, for hot loops. Position and
/// direction are in physical coordinates.
struct TraceExit {
    Status status = Status::singular;
    Vec2 position;
    Vec2 direction;
    double time = 0.0;
    std::size_t bounces = 0;
};
TraceExit trace_exit(const Wall& wall, Vec2 pos, Vec2 dir, const Limits& limits = {});

}  // namespace rough
