#pragma once

#include <condition_variable>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <ostream>
#include <span>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "ebench/clock.hpp"

namespace ebench {

struct PowerSample {
  std::string source_id;
  Seconds timestamp{};
  double watts = 0.0;

  friend auto operator==(const PowerSample&, const PowerSample&)
      -> bool = default;
};

struct MeasurementWindow {
  Seconds start{};
  Seconds end{};

  [[nodiscard]] auto duration() const -> Seconds { return end - start; }
  friend auto operator==(const MeasurementWindow&, const MeasurementWindow&)
      -> bool = default;
};

struct EnergyBreakdown {
  std::map<std::string, double> per_source;  // joules
  double total = 0.0;

  friend auto operator==(const EnergyBreakdown&, const EnergyBreakdown&)
      -> bool = default;
};

/// A sensor that reports instantaneous power in watts.
class PowerSource {
 public:
  virtual ~PowerSource() = default;

  [[nodiscard]] virtual auto id() const -> std::string = 0;
  /// Called once when a tracker starts. Throw to signal the sensor is
  /// unavailable.
  virtual void init() {}
  virtual auto read_watts() -> double = 0;
};

using PowerSourcePtr = std::shared_ptr<PowerSource>;

class ConstantSource final : public PowerSource {
 public:
  ConstantSource(std::string id, double watts)
      : id_(std::move(id)), watts_(watts)
  {
  }
  [[nodiscard]] auto id() const -> std::string override { return id_; }
  auto read_watts() -> double override { return watts_; }

 private:
  std::string id_;
  double watts_;
};

/// Piecewise-constant scripted trace. Breakpoints are (offset from init,
/// watts); the value before the first breakpoint is the first value.
class TraceSource final : public PowerSource {
 public:
  TraceSource(std::string id, std::vector<std::pair<Seconds, double>> steps);
  [[nodiscard]] auto id() const -> std::string override { return id_; }
  void init() override;
  auto read_watts() -> double override;
  [[nodiscard]] auto value_at(Seconds offset) const -> double;

 private:
  std::string id_;
  std::vector<std::pair<Seconds, double>> steps_;
  Seconds origin_{};
};

/// Wraps any callable; handy for tests and in-process backends.
class CallbackSource final : public PowerSource {
 public:
  CallbackSource(std::string id, std::function<double()> fn)
      : id_(std::move(id)), fn_(std::move(fn))
  {
  }
  [[nodiscard]] auto id() const -> std::string override { return id_; }
  auto read_watts() -> double override { return fn_(); }

 private:
  std::string id_;
  std::function<double()> fn_;
};

struct TrackerReading {
  MeasurementWindow window;
  std::vector<PowerSample> samples;  // per-source order preserved
};

/// Polls every source on a fixed interval between start() and stop().
/// One timestamp is taken per polling round and shared by all sources, so
/// the first round sits exactly at window.start and the last at window.end.
class PowerTracker {
 public:
  /// Throws NoSources, or SourceInitFailure naming the failing source.
  static auto start(std::vector<PowerSourcePtr> sources, Seconds interval)
      -> std::unique_ptr<PowerTracker>;

  PowerTracker(const PowerTracker&) = delete;
  auto operator=(const PowerTracker&) -> PowerTracker& = delete;
  ~PowerTracker();

  /// Takes the closing sample round and returns everything collected.
  /// A second call throws NotRunning.
  auto stop() -> TrackerReading;

  [[nodiscard]] auto running() const -> bool;
  [[nodiscard]] auto window_start() const -> Seconds { return start_; }

 private:
  PowerTracker(std::vector<PowerSourcePtr> sources, Seconds interval);
  void sample_round(Seconds at);
  void loop();

  std::vector<PowerSourcePtr> sources_;
  Seconds interval_;
  Seconds start_{};
  Seconds last_round_{};
  std::vector<PowerSample> samples_;

  mutable std::mutex mutex_;
  std::condition_variable cv_;
  bool stop_requested_ = false;
  bool running_ = false;
  std::thread thread_;
};

/// Zero-order-hold integration: per source, sum of power_i * (t_{i+1} - t_i),
/// with the final sample held until window.end. Samples must be strictly
/// increasing in time per source (UnsortedSamples) and lie within the
/// window (InvalidSample). An empty window yields zero energy.
auto integrate_energy(std::span<const PowerSample> samples,
                      const MeasurementWindow& window) -> EnergyBreakdown;

/// Delimited export: header "timestamp_s,source_id,watts".
void write_samples_csv(std::ostream& out, std::span<const PowerSample> samples);

}  // namespace ebench
