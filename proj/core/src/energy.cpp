#include "ebench/energy.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>

#include "ebench/error.hpp"

namespace ebench {

TraceSource::TraceSource(std::string id,
                         std::vector<std::pair<Seconds, double>> steps)
    : id_(std::move(id)), steps_(std::move(steps))
{
  if (steps_.empty()) {
    throw Error(ErrorCode::InvalidSample, "trace '" + id_ + "' has no steps");
  }
  if (!std::is_sorted(steps_.begin(), steps_.end(),
                      [](const auto& a, const auto& b) {
                        return a.first < b.first;
                      })) {
    throw Error(ErrorCode::UnsortedSamples,
                "trace '" + id_ + "' breakpoints out of order");
  }
}

void
TraceSource::init()
{
  origin_ = mono_now();
}

auto
TraceSource::value_at(Seconds offset) const -> double
{
  auto it = std::upper_bound(
      steps_.begin(), steps_.end(), offset,
      [](Seconds t, const auto& step) { return t < step.first; });
  if (it == steps_.begin()) {
    return steps_.front().second;
  }
  return std::prev(it)->second;
}

auto
TraceSource::read_watts() -> double
{
  return value_at(mono_now() - origin_);
}

PowerTracker::PowerTracker(std::vector<PowerSourcePtr> sources, Seconds interval)
    : sources_(std::move(sources)), interval_(interval)
{
}

auto
PowerTracker::start(std::vector<PowerSourcePtr> sources, Seconds interval)
    -> std::unique_ptr<PowerTracker>
{
  if (sources.empty()) {
    throw Error(ErrorCode::NoSources, "tracker needs at least one power source");
  }
  if (!(interval.count() > 0.0)) {
    throw Error(ErrorCode::NonPositiveInterval, "sample interval must be > 0");
  }
  for (const auto& src : sources) {
    if (!src) {
      throw Error(ErrorCode::SourceInitFailure, "null power source");
    }
    try {
      src->init();
    }
    catch (const std::exception& e) {
      throw Error(ErrorCode::SourceInitFailure, src->id() + ": " + e.what());
    }
  }

  std::unique_ptr<PowerTracker> tracker(
      new PowerTracker(std::move(sources), interval));
  tracker->start_ = mono_now();
  tracker->sample_round(tracker->start_);
  tracker->running_ = true;
  tracker->thread_ = std::thread([t = tracker.get()] { t->loop(); });
  return tracker;
}

PowerTracker::~PowerTracker()
{
  {
    std::lock_guard lock(mutex_);
    stop_requested_ = true;
  }
  cv_.notify_all();
  if (thread_.joinable()) {
    thread_.join();
  }
}

void
PowerTracker::sample_round(Seconds at)
{
  // Rounds must be strictly increasing even if the clock did not advance.
  if (!samples_.empty() && at <= last_round_) {
    at = Seconds(std::nextafter(last_round_.count(),
                                std::numeric_limits<double>::infinity()));
  }
  last_round_ = at;
  for (const auto& src : sources_) {
    samples_.push_back({src->id(), at, src->read_watts()});
  }
}

void
PowerTracker::loop()
{
  std::unique_lock lock(mutex_);
  std::int64_t tick = 1;
  while (true) {
    const auto deadline = to_time_point(start_ + interval_ * tick);
    if (cv_.wait_until(lock, deadline, [this] { return stop_requested_; })) {
      return;
    }
    sample_round(mono_now());
    // Skip ticks that have already passed if a slow sensor held us up.
    const auto elapsed = (mono_now() - start_) / interval_;
    tick = std::max<std::int64_t>(tick + 1,
                                  static_cast<std::int64_t>(elapsed) + 1);
  }
}

auto
PowerTracker::running() const -> bool
{
  std::lock_guard lock(mutex_);
  return running_;
}

auto
PowerTracker::stop() -> TrackerReading
{
  {
    std::lock_guard lock(mutex_);
    if (!running_) {
      throw Error(ErrorCode::NotRunning, "tracker is not running");
    }
    running_ = false;
    stop_requested_ = true;
  }
  cv_.notify_all();
  thread_.join();

  const auto end = mono_now();
  sample_round(end);

  TrackerReading out;
  out.window = {start_, last_round_};
  out.samples = std::move(samples_);
  samples_.clear();
  return out;
}

auto
integrate_energy(std::span<const PowerSample> samples,
                 const MeasurementWindow& window) -> EnergyBreakdown
{
  if (window.end < window.start) {
    throw Error(ErrorCode::InvalidSample, "window ends before it starts");
  }

  // Group indices per source, preserving order.
  std::map<std::string, std::vector<const PowerSample*>> by_source;
  for (const auto& s : samples) {
    if (s.timestamp < window.start || s.timestamp > window.end) {
      throw Error(ErrorCode::InvalidSample,
                  "sample of '" + s.source_id + "' outside the window");
    }
    if (!(s.watts >= 0.0) || !std::isfinite(s.watts)) {
      throw Error(ErrorCode::InvalidSample,
                  "negative or non-finite power from '" + s.source_id + "'");
    }
    auto& list = by_source[s.source_id];
    if (!list.empty() && !(list.back()->timestamp < s.timestamp)) {
      throw Error(ErrorCode::UnsortedSamples,
                  "timestamps of '" + s.source_id + "' not strictly increasing");
    }
    list.push_back(&s);
  }

  EnergyBreakdown out;
  for (const auto& [id, list] : by_source) {
    double joules = 0.0;
    for (std::size_t i = 0; i < list.size(); ++i) {
      const auto next =
          i + 1 < list.size() ? list[i + 1]->timestamp : window.end;
      joules += list[i]->watts * (next - list[i]->timestamp).count();
    }
    out.per_source[id] = joules;
    out.total += joules;
  }
  return out;
}

void
write_samples_csv(std::ostream& out, std::span<const PowerSample> samples)
{
  const auto old_precision = out.precision();
  out << "timestamp_s,source_id,watts\n";
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (const auto& s : samples) {
    out << s.timestamp.count() << ',' << s.source_id << ',' << s.watts << '\n';
  }
  out.precision(old_precision);
}

}  // namespace ebench
