#pragma once

namespace ebench {

inline constexpr double kJoulesPerKwh = 3.6e6;

struct GridProfile {
  double carbon_intensity = 475.0;  // g CO2eq / kWh
  double pue = 1.0;

  friend auto operator==(const GridProfile&, const GridProfile&) -> bool = default;
};

struct EmissionsEstimate {
  double energy_kwh = 0.0;
  double carbon_intensity = 0.0;
  double pue = 1.0;
  double grams_co2eq = 0.0;

  friend auto operator==(const EmissionsEstimate&, const EmissionsEstimate&)
      -> bool = default;
};

[[nodiscard]] auto is_valid(const GridProfile& grid) -> bool;

/// kWh = J / 3.6e6, grams = kWh * intensity * PUE. Throws InvalidGrid for
/// a profile outside its invariants and InvalidSample for negative energy.
[[nodiscard]] auto estimate_emissions(double joules, const GridProfile& grid)
    -> EmissionsEstimate;

}  // namespace ebench
