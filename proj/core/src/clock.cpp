#include "ebench/clock.hpp"

namespace ebench {

auto
mono_origin() -> SteadyClock::time_point
{
  static const auto origin = SteadyClock::now();
  return origin;
}

auto
mono_now() -> Seconds
{
  const auto origin = mono_origin();
  return std::chrono::duration_cast<Seconds>(SteadyClock::now() - origin);
}

auto
to_time_point(Seconds t) -> SteadyClock::time_point
{
  return mono_origin() +
         std::chrono::duration_cast<SteadyClock::duration>(t);
}

}  // namespace ebench
