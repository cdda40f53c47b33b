#include "ebench/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <map>

#include "ebench/error.hpp"

namespace ebench {

auto
RunResult::failures() const -> std::size_t
{
  return static_cast<std::size_t>(std::count_if(
      records.begin(), records.end(),
      [](const RequestRecord& r) { return !r.status.ok(); }));
}

auto
select_sources(const EnergyBreakdown& energy, const SourceFilter& filter)
    -> std::vector<std::string>
{
  std::vector<std::string> out;
  if (filter.patterns.empty()) {
    for (const auto& [id, _] : energy.per_source) {
      out.push_back(id);
    }
    return out;
  }
  for (const auto& [id, _] : energy.per_source) {
    for (const auto& pattern : filter.patterns) {
      const bool prefix = !pattern.empty() && pattern.back() == '*';
      const bool match =
          prefix ? id.starts_with(std::string_view(pattern).substr(
                       0, pattern.size() - 1))
                 : id == pattern;
      if (match) {
        out.push_back(id);
        break;
      }
    }
  }
  for (const auto& pattern : filter.patterns) {
    if ((pattern.empty() || pattern.back() != '*') &&
        !energy.per_source.contains(pattern)) {
      throw Error(ErrorCode::UnknownSource,
                  "source '" + pattern + "' is not in the energy breakdown");
    }
  }
  return out;
}

auto
energy_per_request(const EnergyBreakdown& energy, int attempted_requests,
                   const SourceFilter& filter) -> double
{
  if (attempted_requests <= 0) {
    throw Error(ErrorCode::ZeroRequests, "no requests were attempted");
  }
  const auto ids = select_sources(energy, filter);
  if (ids.empty()) {
    std::clog << "warning: source filter selected no energy sources\n";
    return 0.0;
  }
  double joules = 0.0;
  for (const auto& id : ids) {
    joules += energy.per_source.at(id);
  }
  return joules / static_cast<double>(attempted_requests);
}

auto
energy_per_request(const RunResult& result, const SourceFilter& filter) -> double
{
  return energy_per_request(result.energy, result.spec.request_count, filter);
}

auto
aggregate_repeats(std::span<const double> values) -> RepeatStats
{
  if (values.empty()) {
    throw Error(ErrorCode::EmptyInput, "no values to aggregate");
  }
  // Welford's update.
  RepeatStats stats;
  double m2 = 0.0;
  for (double v : values) {
    ++stats.count;
    const double delta = v - stats.mean;
    stats.mean += delta / static_cast<double>(stats.count);
    m2 += delta * (v - stats.mean);
  }
  if (stats.count > 1) {
    stats.stddev =
        std::sqrt(std::max(0.0, m2 / static_cast<double>(stats.count - 1)));
  }
  return stats;
}

auto
build_series(std::span<const RunResult> results, const SourceFilter& filter)
    -> std::vector<SweepSeries>
{
  std::vector<std::string> order;
  std::map<std::string, std::map<int, std::vector<double>>> grouped;
  for (const auto& r : results) {
    if (!grouped.contains(r.spec.model)) {
      order.push_back(r.spec.model);
    }
    grouped[r.spec.model][r.spec.request_count].push_back(
        energy_per_request(r, filter));
  }

  std::vector<SweepSeries> out;
  for (const auto& model : order) {
    SweepSeries series{model, {}};
    for (const auto& [load, values] : grouped[model]) {
      const auto stats = aggregate_repeats(values);
      series.points.push_back({load, stats.mean, stats.stddev, stats.count});
    }
    out.push_back(std::move(series));
  }
  return out;
}

auto
detect_plateau(const SweepSeries& series, double epsilon) -> PlateauResult
{
  const auto& pts = series.points;
  if (pts.size() < 2) {
    throw Error(ErrorCode::TooFewPoints,
                "plateau detection needs at least two points");
  }
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    const double base = pts[i].mean;
    const bool flat = std::all_of(
        pts.begin() + static_cast<std::ptrdiff_t>(i) + 1, pts.end(),
        [&](const SeriesPoint& p) {
          if (base == 0.0) {
            return p.mean == 0.0;
          }
          return std::abs(p.mean - base) / std::abs(base) <= epsilon;
        });
    if (flat) {
      return {true, pts[i].load, base};
    }
  }
  return {};
}

auto
fit_params_vs_energy(std::span<const ParamPoint> points) -> LinearFit
{
  if (points.size() < 2) {
    throw Error(ErrorCode::TooFewPoints, "a line needs at least two points");
  }
  const auto n = static_cast<double>(points.size());
  double mean_x = 0.0;
  double mean_y = 0.0;
  for (const auto& p : points) {
    mean_x += p.params;
    mean_y += p.joules;
  }
  mean_x /= n;
  mean_y /= n;

  double sxx = 0.0;
  double sxy = 0.0;
  double syy = 0.0;
  for (const auto& p : points) {
    const double dx = p.params - mean_x;
    const double dy = p.joules - mean_y;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  if (sxx == 0.0) {
    throw Error(ErrorCode::DegenerateInput, "all parameter counts are equal");
  }

  LinearFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = mean_y - fit.slope * mean_x;
  if (syy == 0.0) {
    fit.r_squared = 1.0;
  }
  else {
    double ss_res = 0.0;
    for (const auto& p : points) {
      const double r = p.joules - (fit.slope * p.params + fit.intercept);
      ss_res += r * r;
    }
    fit.r_squared = std::clamp(1.0 - ss_res / syy, 0.0, 1.0);
  }
  return fit;
}

auto
fit_residuals(const LinearFit& fit, std::span<const ParamPoint> points)
    -> std::vector<double>
{
  std::vector<double> out;
  out.reserve(points.size());
  for (const auto& p : points) {
    out.push_back(p.joules - (fit.slope * p.params + fit.intercept));
  }
  return out;
}

}  // namespace ebench
