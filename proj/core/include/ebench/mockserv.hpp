#pragma once

#include <cstddef>
#include <cstdint>
#include <deque>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "ebench/clock.hpp"
#include "ebench/energy.hpp"
#include "ebench/loadgen.hpp"

namespace ebench {

/// Fails request indices i with (i + 1) % every == 0, i.e. every 3rd request
/// for every = 3. every = 0 disables faults.
struct FaultSchedule {
  int every = 0;

  [[nodiscard]] auto hits(std::size_t request_index) const -> bool
  {
    return every > 0 && (request_index + 1) % static_cast<std::size_t>(every) == 0;
  }
  friend auto operator==(const FaultSchedule&, const FaultSchedule&)
      -> bool = default;
};

struct MockConfig {
  int capacity = 100;                   // max concurrently executing requests
  Seconds per_request_duration{2.0};    // service time d
  int tokens_per_response = 16;         // g
  double idle_power = 100.0;            // W
  double peak_power = 300.0;            // W at full occupancy, above idle
  FaultSchedule faults;
};

/// Throws InvalidConfig when an invariant of MockConfig is broken.
void check_mock_config(const MockConfig& cfg);

/// P_idle + P_peak * inflight / C.
[[nodiscard]] auto synthetic_power(const MockConfig& cfg, int inflight) -> double;

/// Closed-form joules per request for a burst of `requests` against the
/// mock: ceil(N/C) batches of idle power plus N*d/C of peak power, all over N.
[[nodiscard]] auto analytic_energy_per_request(std::int64_t requests,
                                               const MockConfig& cfg) -> double;

/// Deterministic response body: same request and config give the same bytes.
[[nodiscard]] auto mock_completion_body(const CompletionRequest& request,
                                        const MockConfig& cfg) -> std::string;

struct InflightEvent {
  Seconds time{};
  int inflight = 0;
};

struct MockReply {
  int http_status = 200;
  std::string body;
};

/// The serving model behind the HTTP front: a FIFO queue in front of C
/// slots, each occupied for exactly d seconds. On arrival a request books the
/// earliest free slot, so occupancy is a function of the booked schedule and
/// does not depend on how quickly waiting threads get scheduled.
class MockBackend {
 public:
  explicit MockBackend(MockConfig cfg);

  /// Blocks through queueing and service, then returns the reply. The fault
  /// schedule is keyed on `request_index` when given, otherwise on arrival
  /// order.
  auto handle_completion(const CompletionRequest& request,
                         std::optional<std::size_t> request_index = std::nullopt)
      -> MockReply;

  [[nodiscard]] auto synthetic_power() const -> double;
  [[nodiscard]] auto inflight() const -> int;
  [[nodiscard]] auto max_inflight() const -> int;
  [[nodiscard]] auto requests_handled() const -> std::size_t;
  [[nodiscard]] auto inflight_log() const -> std::vector<InflightEvent>;
  void reset_log();
  [[nodiscard]] auto config() const -> const MockConfig& { return cfg_; }

 private:
  [[nodiscard]] auto inflight_at(Seconds t) const -> int;

  MockConfig cfg_;
  mutable std::mutex mutex_;
  // Min-heap of the times at which each slot next becomes free.
  std::vector<Seconds> slot_free_;
  // Service start times in booking order; FIFO with a fixed d keeps them
  // sorted. Entries that ended before log_origin_ are pruned.
  std::deque<Seconds> starts_;
  Seconds log_origin_{};
  std::size_t arrivals_ = 0;
  std::size_t handled_ = 0;
};

/// HTTP front end. Routes:
///   POST /v1/completions     completions API
///   GET  /mock/state         {"inflight","power_watts","requests_handled",...}
///   GET  /mock/inflight_log  {"capacity","max_inflight","events":[{"t","inflight"}]}
///   POST /mock/reset         clears the inflight log
///   GET  /health
class MockServer {
 public:
  /// Binds immediately (port 0 picks a free port) and serves on a background
  /// thread. Throws PortInUse when the bind fails.
  MockServer(MockConfig cfg, std::string host = "127.0.0.1", int port = 0,
             int worker_threads = 1024);
  MockServer(const MockServer&) = delete;
  auto operator=(const MockServer&) -> MockServer& = delete;
  ~MockServer();

  [[nodiscard]] auto port() const -> int { return port_; }
  [[nodiscard]] auto host() const -> const std::string& { return host_; }
  [[nodiscard]] auto base_url() const -> std::string;
  [[nodiscard]] auto backend() -> MockBackend& { return *backend_; }
  [[nodiscard]] auto backend() const -> const MockBackend& { return *backend_; }

  void stop();

 private:
  struct Impl;
  std::unique_ptr<MockBackend> backend_;
  std::unique_ptr<Impl> impl_;
  std::string host_;
  int port_ = 0;
};

/// In-process power sensor reading the backend's synthetic power.
class MockPowerSource final : public PowerSource {
 public:
  explicit MockPowerSource(const MockBackend& backend, std::string id = "mock")
      : backend_(backend), id_(std::move(id))
  {
  }
  [[nodiscard]] auto id() const -> std::string override { return id_; }
  auto read_watts() -> double override { return backend_.synthetic_power(); }

 private:
  const MockBackend& backend_;
  std::string id_;
};

/// Reads a remote mock's power through GET /mock/state.
class HttpMockPowerSource final : public PowerSource {
 public:
  explicit HttpMockPowerSource(std::string base_url, std::string id = "mock");
  ~HttpMockPowerSource() override;
  [[nodiscard]] auto id() const -> std::string override { return id_; }
  void init() override;
  auto read_watts() -> double override;

 private:
  struct Impl;
  std::string base_url_;
  std::string id_;
  std::unique_ptr<Impl> impl_;
};

struct MockStateSnapshot {
  int capacity = 0;
  int max_inflight = 0;
  std::vector<InflightEvent> events;
};

/// Fetches GET /mock/inflight_log from a running mock.
auto fetch_inflight_log(const std::string& base_url) -> MockStateSnapshot;

}  // namespace ebench
