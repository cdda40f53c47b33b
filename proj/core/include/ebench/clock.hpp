#pragma once

#include <chrono>

namespace ebench {

/// Monotonic time expressed as fractional seconds since a process-wide
/// origin. Every timestamp in the harness (samples, request records,
/// windows) uses this one representation so reports round-trip exactly.
using Seconds = std::chrono::duration<double>;

using SteadyClock = std::chrono::steady_clock;

auto mono_origin() -> SteadyClock::time_point;
auto mono_now() -> Seconds;
auto to_time_point(Seconds t) -> SteadyClock::time_point;

}  // namespace ebench
