#pragma once

// Reference computations for the tests. Each one takes a different route
// from the library code it checks and must stay independent of it.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <set>
#include <utility>
#include <vector>

namespace ebench::oracle {

/// A piecewise-constant power trace: power[k] holds on [times[k], times[k+1]).
struct StepTrace {
  std::vector<double> times;
  std::vector<double> power;
  double window_end = 0.0;
};

/// Splits the window at every breakpoint and sums power * width, with power
/// looked up at each sub-interval midpoint by linear search over the trace.
inline auto
brute_force_energy(const StepTrace& trace, double window_start) -> long double
{
  std::set<double> cuts(trace.times.begin(), trace.times.end());
  cuts.insert(window_start);
  cuts.insert(trace.window_end);
  std::vector<double> edges(cuts.begin(), cuts.end());
  long double total = 0.0L;
  for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
    const double a = edges[i];
    const double b = edges[i + 1];
    if (a < trace.times.front() || b > trace.window_end) {
      continue;
    }
    const double mid = a + (b - a) / 2.0;
    double p = 0.0;
    for (std::size_t k = 0; k < trace.times.size(); ++k) {
      if (trace.times[k] <= mid) {
        p = trace.power[k];
      }
    }
    total += static_cast<long double>(p) * (static_cast<long double>(b) - a);
  }
  return total;
}

inline auto
random_trace(std::mt19937_64& rng) -> StepTrace
{
  std::uniform_int_distribution<int> count(1, 40);
  std::uniform_real_distribution<double> gap(1e-3, 20.0);
  std::uniform_real_distribution<double> watts(0.0, 450.0);
  StepTrace t;
  double now = std::uniform_real_distribution<double>(0.0, 100.0)(rng);
  const int n = count(rng);
  for (int i = 0; i < n; ++i) {
    t.times.push_back(now);
    t.power.push_back(watts(rng));
    now += gap(rng);
  }
  t.window_end = t.times.back() + std::uniform_real_distribution<double>(0.0, 20.0)(rng);
  return t;
}

/// Two-pass mean and sample standard deviation in long double.
inline auto
two_pass_stats(const std::vector<double>& v) -> std::pair<double, double>
{
  long double sum = 0.0L;
  for (double x : v) {
    sum += x;
  }
  const long double mean = sum / static_cast<long double>(v.size());
  if (v.size() < 2) {
    return {static_cast<double>(mean), 0.0};
  }
  long double ss = 0.0L;
  for (double x : v) {
    ss += (x - mean) * (x - mean);
  }
  return {static_cast<double>(mean),
          static_cast<double>(std::sqrt(ss / static_cast<long double>(v.size() - 1)))};
}

struct NormalEquationsFit {
  long double slope = 0.0L;
  long double intercept = 0.0L;
  std::vector<long double> residuals;
};

/// Solves [n  Sx; Sx  Sxx] [b; m] = [Sy; Sxy] by Cramer's rule.
inline auto
normal_equations_fit(const std::vector<std::pair<double, double>>& pts)
    -> NormalEquationsFit
{
  long double n = 0.0L, sx = 0.0L, sy = 0.0L, sxx = 0.0L, sxy = 0.0L;
  for (const auto& [x, y] : pts) {
    n += 1.0L;
    sx += x;
    sy += y;
    sxx += static_cast<long double>(x) * x;
    sxy += static_cast<long double>(x) * y;
  }
  const long double det = n * sxx - sx * sx;
  NormalEquationsFit fit;
  fit.slope = (n * sxy - sx * sy) / det;
  fit.intercept = (sy * sxx - sx * sxy) / det;
  for (const auto& [x, y] : pts) {
    fit.residuals.push_back(y - (fit.slope * x + fit.intercept));
  }
  return fit;
}

/// Event-driven simulation of a burst of `n` requests on a FIFO server with
/// `c` slots and service time `d`, integrating idle + peak * inflight / c
/// over the makespan. Returns joules per request.
inline auto
simulate_mock_energy(std::int64_t n, std::int64_t c, double d, double idle,
                     double peak) -> double
{
  // Request i starts when slot (i mod c) frees up.
  std::vector<double> slot_free(static_cast<std::size_t>(c), 0.0);
  std::multimap<double, int> events;  // time -> +1 / -1
  double makespan = 0.0;
  for (std::int64_t i = 0; i < n; ++i) {
    auto it = std::min_element(slot_free.begin(), slot_free.end());
    const double start = *it;
    *it = start + d;
    events.emplace(start, +1);
    events.emplace(start + d, -1);
    makespan = std::max(makespan, start + d);
  }
  long double energy = 0.0L;
  int inflight = 0;
  double prev = 0.0;
  for (const auto& [t, delta] : events) {
    energy += (idle + peak * static_cast<double>(inflight) / static_cast<double>(c)) *
              static_cast<long double>(t - prev);
    inflight += delta;
    prev = t;
  }
  energy += idle * static_cast<long double>(makespan - prev);
  return static_cast<double>(energy / static_cast<long double>(n));
}

}  // namespace ebench::oracle
