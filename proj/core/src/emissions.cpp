#include "ebench/emissions.hpp"

#include <cmath>

#include "ebench/error.hpp"

namespace ebench {

auto
is_valid(const GridProfile& grid) -> bool
{
  return std::isfinite(grid.carbon_intensity) && grid.carbon_intensity >= 0.0 &&
         std::isfinite(grid.pue) && grid.pue >= 1.0;
}

auto
estimate_emissions(double joules, const GridProfile& grid) -> EmissionsEstimate
{
  if (!is_valid(grid)) {
    throw Error(ErrorCode::InvalidGrid,
                "carbon intensity must be >= 0 and PUE >= 1");
  }
  if (!(joules >= 0.0) || !std::isfinite(joules)) {
    throw Error(ErrorCode::InvalidSample, "energy must be finite and >= 0");
  }
  EmissionsEstimate out;
  out.energy_kwh = joules / kJoulesPerKwh;
  out.carbon_intensity = grid.carbon_intensity;
  out.pue = grid.pue;
  out.grams_co2eq = out.energy_kwh * grid.carbon_intensity * grid.pue;
  return out;
}

}  // namespace ebench
