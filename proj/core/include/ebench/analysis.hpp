#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "ebench/emissions.hpp"
#include "ebench/energy.hpp"
#include "ebench/loadgen.hpp"
#include "ebench/plan.hpp"

namespace ebench {

struct RunResult {
  RunSpec spec;
  WarmupSummary warmup;
  MeasurementWindow window;
  std::vector<PowerSample> samples;
  EnergyBreakdown energy;
  std::vector<RequestRecord> records;  // one per prompt id, prompt order
  EmissionsEstimate emissions;

  [[nodiscard]] auto failures() const -> std::size_t;
  friend auto operator==(const RunResult&, const RunResult&) -> bool = default;
};

/// Source selection for energy sums. Empty selects every source. An entry
/// ending in '*' is a prefix match ("gpu*"); anything else must name a
/// source present in the breakdown.
struct SourceFilter {
  std::vector<std::string> patterns;
};

/// Source ids of `energy` selected by `filter`. Throws UnknownSource for an
/// exact id that is not present.
auto select_sources(const EnergyBreakdown& energy, const SourceFilter& filter)
    -> std::vector<std::string>;

/// Filtered energy divided by the attempted request count. A filter that
/// selects nothing yields 0 and a warning on stderr.
auto energy_per_request(const EnergyBreakdown& energy, int attempted_requests,
                        const SourceFilter& filter = {}) -> double;
auto energy_per_request(const RunResult& result, const SourceFilter& filter = {})
    -> double;

struct RepeatStats {
  double mean = 0.0;
  double stddev = 0.0;  // sample (n - 1) standard deviation, 0 for n == 1
  std::size_t count = 0;

  friend auto operator==(const RepeatStats&, const RepeatStats&) -> bool = default;
};

auto aggregate_repeats(std::span<const double> values) -> RepeatStats;

struct SeriesPoint {
  int load = 0;
  double mean = 0.0;
  double stddev = 0.0;
  std::size_t repeats = 0;

  friend auto operator==(const SeriesPoint&, const SeriesPoint&) -> bool = default;
};

struct SweepSeries {
  std::string model;
  std::vector<SeriesPoint> points;  // ascending load

  friend auto operator==(const SweepSeries&, const SweepSeries&) -> bool = default;
};

/// Groups results by model (first-appearance order) and load, aggregating
/// energy per request over repeats.
auto build_series(std::span<const RunResult> results,
                  const SourceFilter& filter = {}) -> std::vector<SweepSeries>;

struct PlateauResult {
  bool found = false;
  int plateau_load = 0;
  double plateau_value = 0.0;

  friend auto operator==(const PlateauResult&, const PlateauResult&)
      -> bool = default;
};

/// Smallest index i such that every later point stays within `epsilon`
/// relative distance of point i. Not found when only the last point
/// qualifies. Throws TooFewPoints below two points.
auto detect_plateau(const SweepSeries& series, double epsilon = 0.05)
    -> PlateauResult;

struct ParamPoint {
  double params = 0.0;
  double joules = 0.0;
};

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;

  friend auto operator==(const LinearFit&, const LinearFit&) -> bool = default;
};

/// Ordinary least squares y = slope * x + intercept. Throws DegenerateInput
/// when all x are equal and TooFewPoints below two points.
auto fit_params_vs_energy(std::span<const ParamPoint> points) -> LinearFit;

/// y - (slope * x + intercept) for every point.
auto fit_residuals(const LinearFit& fit, std::span<const ParamPoint> points)
    -> std::vector<double>;

}  // namespace ebench
