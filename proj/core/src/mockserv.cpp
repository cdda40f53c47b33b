#include "ebench/mockserv.hpp"

#include <httplib.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <thread>

#include <json.hpp>

#include "ebench/error.hpp"

namespace ebench {

using nlohmann::json;

namespace {

constexpr std::array<const char*, 16> kFiller = {
    "the",   "model", "keeps", "going", "until", "it",    "runs",  "out",
    "of",    "tokens", "and",  "then",  "stops", "right", "here",  "now"};

auto
fnv1a(std::string_view data, std::uint64_t seed = 1469598103934665603ULL)
    -> std::uint64_t
{
  auto h = seed;
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

auto
word_count(std::string_view text) -> int
{
  int words = 0;
  bool in_word = false;
  for (char c : text) {
    const bool space = c == ' ' || c == '\t' || c == '\n' || c == '\r';
    if (!space && !in_word) {
      ++words;
    }
    in_word = !space;
  }
  return words;
}

}  // namespace

void
check_mock_config(const MockConfig& cfg)
{
  if (cfg.capacity < 1) {
    throw Error(ErrorCode::InvalidConfig, "mock capacity must be >= 1");
  }
  if (!(cfg.per_request_duration.count() > 0.0)) {
    throw Error(ErrorCode::InvalidConfig, "mock service time must be > 0");
  }
  if (cfg.tokens_per_response < 1) {
    throw Error(ErrorCode::InvalidConfig, "mock tokens per response must be >= 1");
  }
  if (!(cfg.idle_power >= 0.0) || !(cfg.peak_power >= 0.0)) {
    throw Error(ErrorCode::InvalidConfig, "mock power levels must be >= 0");
  }
  if (cfg.faults.every < 0) {
    throw Error(ErrorCode::InvalidConfig, "fault period must be >= 0");
  }
}

auto
synthetic_power(const MockConfig& cfg, int inflight) -> double
{
  return cfg.idle_power +
         cfg.peak_power * static_cast<double>(inflight) /
             static_cast<double>(cfg.capacity);
}

auto
analytic_energy_per_request(std::int64_t requests, const MockConfig& cfg)
    -> double
{
  if (requests < 1) {
    throw Error(ErrorCode::ZeroRequests, "need at least one request");
  }
  const auto n = static_cast<double>(requests);
  const auto c = static_cast<double>(cfg.capacity);
  const auto d = cfg.per_request_duration.count();
  const auto batches =
      static_cast<double>((requests + cfg.capacity - 1) / cfg.capacity);
  const double idle = cfg.idle_power * batches * d;
  const double busy = cfg.peak_power * n * d / c;
  return (idle + busy) / n;
}

auto
mock_completion_body(const CompletionRequest& request, const MockConfig& cfg)
    -> std::string
{
  const auto h = fnv1a(request.prompt, fnv1a(request.model));
  std::string text;
  for (int k = 0; k < cfg.tokens_per_response; ++k) {
    const auto word = kFiller[((h >> ((k % 16) * 4)) + static_cast<std::uint64_t>(k)) %
                              kFiller.size()];
    text += ' ';
    text += word;
  }
  const int prompt_tokens = word_count(request.prompt);
  char id_hex[17];
  std::snprintf(id_hex, sizeof id_hex, "%016llx",
                static_cast<unsigned long long>(h));
  json body = {
      {"id", std::string("cmpl-mock-") + id_hex},
      {"object", "text_completion"},
      {"created", 0},
      {"model", request.model},
      {"choices",
       json::array({{{"index", 0},
                     {"text", text},
                     {"logprobs", nullptr},
                     {"finish_reason", "length"}}})},
      {"usage",
       {{"prompt_tokens", prompt_tokens},
        {"completion_tokens", cfg.tokens_per_response},
        {"total_tokens", prompt_tokens + cfg.tokens_per_response}}},
  };
  return body.dump();
}

MockBackend::MockBackend(MockConfig cfg) : cfg_(std::move(cfg))
{
  check_mock_config(cfg_);
  slot_free_.assign(static_cast<std::size_t>(cfg_.capacity), Seconds::min());
  log_origin_ = mono_now();
}

auto
MockBackend::handle_completion(const CompletionRequest& request,
                               std::optional<std::size_t> request_index)
    -> MockReply
{
  std::size_t index = 0;
  Seconds done{};
  {
    std::lock_guard lock(mutex_);
    index = request_index.value_or(arrivals_);
    ++arrivals_;
    std::pop_heap(slot_free_.begin(), slot_free_.end(), std::greater<>{});
    const Seconds start = std::max(mono_now(), slot_free_.back());
    done = start + cfg_.per_request_duration;
    slot_free_.back() = done;
    std::push_heap(slot_free_.begin(), slot_free_.end(), std::greater<>{});
    starts_.push_back(start);
  }

  std::this_thread::sleep_until(to_time_point(done));

  {
    std::lock_guard lock(mutex_);
    ++handled_;
  }

  if (cfg_.faults.hits(index)) {
    return {500, R"({"error":{"message":"injected fault","type":"server_error"}})"};
  }
  return {200, mock_completion_body(request, cfg_)};
}

auto
MockBackend::inflight_at(Seconds t) const -> int
{
  const auto d = cfg_.per_request_duration;
  const auto started = std::partition_point(
      starts_.begin(), starts_.end(), [&](Seconds s) { return s <= t; });
  const auto finished = std::partition_point(
      starts_.begin(), starts_.end(), [&](Seconds s) { return s + d <= t; });
  return static_cast<int>(started - finished);
}

auto
MockBackend::synthetic_power() const -> double
{
  const auto now = mono_now();
  std::lock_guard lock(mutex_);
  return ebench::synthetic_power(cfg_, inflight_at(now));
}

auto
MockBackend::inflight() const -> int
{
  const auto now = mono_now();
  std::lock_guard lock(mutex_);
  return inflight_at(now);
}

auto
MockBackend::max_inflight() const -> int
{
  int peak = 0;
  for (const auto& e : inflight_log()) {
    peak = std::max(peak, e.inflight);
  }
  return peak;
}

auto
MockBackend::requests_handled() const -> std::size_t
{
  std::lock_guard lock(mutex_);
  return handled_;
}

auto
MockBackend::inflight_log() const -> std::vector<InflightEvent>
{
  const auto now = mono_now();
  std::lock_guard lock(mutex_);
  const auto d = cfg_.per_request_duration;
  std::vector<InflightEvent> log{{log_origin_, inflight_at(log_origin_)}};
  // Merge service starts and ends; at equal times the end goes first since a
  // slot covers [start, start + d).
  std::size_t i = 0;
  std::size_t k = 0;
  int level = log.front().inflight;
  while (true) {
    while (i < starts_.size() && starts_[i] <= log_origin_) {
      ++i;
    }
    while (k < starts_.size() && starts_[k] + d <= log_origin_) {
      ++k;
    }
    const bool has_start = i < starts_.size() && starts_[i] <= now;
    const bool has_end = k < starts_.size() && starts_[k] + d <= now;
    if (!has_start && !has_end) {
      break;
    }
    if (has_end && (!has_start || starts_[k] + d <= starts_[i])) {
      log.push_back({starts_[k] + d, --level});
      ++k;
    }
    else {
      log.push_back({starts_[i], ++level});
      ++i;
    }
  }
  return log;
}

void
MockBackend::reset_log()
{
  const auto now = mono_now();
  std::lock_guard lock(mutex_);
  log_origin_ = now;
  while (!starts_.empty() && starts_.front() + cfg_.per_request_duration <= now) {
    starts_.pop_front();
  }
}

struct MockServer::Impl {
  httplib::Server server;
  std::thread thread;
};

namespace {

auto
log_to_json(const MockBackend& backend) -> json
{
  json events = json::array();
  for (const auto& e : backend.inflight_log()) {
    events.push_back({{"t", e.time.count()}, {"inflight", e.inflight}});
  }
  return {{"capacity", backend.config().capacity},
          {"max_inflight", backend.max_inflight()},
          {"events", std::move(events)}};
}

}  // namespace

MockServer::MockServer(MockConfig cfg, std::string host, int port,
                       int worker_threads)
    : backend_(std::make_unique<MockBackend>(std::move(cfg))),
      impl_(std::make_unique<Impl>()),
      host_(std::move(host))
{
  auto& svr = impl_->server;
  const auto workers = static_cast<std::size_t>(std::max(worker_threads, 8));
  svr.new_task_queue = [workers] { return new httplib::ThreadPool(workers); };

  auto* backend = backend_.get();
  svr.Post("/v1/completions", [backend](const httplib::Request& req,
                                        httplib::Response& res) {
    const auto doc = json::parse(req.body, nullptr, false);
    if (doc.is_discarded() || !doc.is_object() || !doc.contains("prompt") ||
        !doc["prompt"].is_string()) {
      res.status = 400;
      res.set_content(R"({"error":{"message":"bad request"}})",
                      "application/json");
      return;
    }
    CompletionRequest request;
    request.model = doc.value("model", std::string());
    request.prompt = doc["prompt"].get<std::string>();
    request.max_tokens = doc.value("max_tokens", 16);
    request.temperature = doc.value("temperature", 0.0);

    std::optional<std::size_t> index;
    if (req.has_header("X-Request-Id")) {
      try {
        index = std::stoull(req.get_header_value("X-Request-Id"));
      }
      catch (const std::exception&) {
        index.reset();
      }
    }
    auto reply = backend->handle_completion(request, index);
    res.status = reply.http_status;
    res.set_content(reply.body, "application/json");
  });
  svr.Get("/mock/state", [backend](const httplib::Request&,
                                   httplib::Response& res) {
    json body = {{"capacity", backend->config().capacity},
                 {"inflight", backend->inflight()},
                 {"max_inflight", backend->max_inflight()},
                 {"power_watts", backend->synthetic_power()},
                 {"requests_handled", backend->requests_handled()}};
    res.set_content(body.dump(), "application/json");
  });
  svr.Get("/mock/inflight_log", [backend](const httplib::Request&,
                                          httplib::Response& res) {
    res.set_content(log_to_json(*backend).dump(), "application/json");
  });
  svr.Post("/mock/reset", [backend](const httplib::Request&,
                                    httplib::Response& res) {
    backend->reset_log();
    res.set_content("{}", "application/json");
  });
  svr.Get("/health", [](const httplib::Request&, httplib::Response& res) {
    res.set_content(R"({"status":"ok"})", "application/json");
  });

  if (port == 0) {
    port_ = svr.bind_to_any_port(host_);
    if (port_ < 0) {
      throw Error(ErrorCode::PortInUse, "cannot bind " + host_);
    }
  }
  else {
    if (!svr.bind_to_port(host_, port)) {
      throw Error(ErrorCode::PortInUse,
                  host_ + ":" + std::to_string(port) + " is not available");
    }
    port_ = port;
  }
  impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
  svr.wait_until_ready();
}

MockServer::~MockServer() { stop(); }

void
MockServer::stop()
{
  if (impl_ && impl_->thread.joinable()) {
    impl_->server.stop();
    impl_->thread.join();
  }
}

auto
MockServer::base_url() const -> std::string
{
  return "http://" + host_ + ":" + std::to_string(port_);
}

struct HttpMockPowerSource::Impl {
  explicit Impl(const std::string& url) : client(url)
  {
    client.set_keep_alive(true);
    client.set_connection_timeout(2, 0);
    client.set_read_timeout(2, 0);
  }
  httplib::Client client;
};

HttpMockPowerSource::HttpMockPowerSource(std::string base_url, std::string id)
    : base_url_(std::move(base_url)), id_(std::move(id))
{
}

HttpMockPowerSource::~HttpMockPowerSource() = default;

void
HttpMockPowerSource::init()
{
  impl_ = std::make_unique<Impl>(base_url_);
  (void)read_watts();
}

auto
HttpMockPowerSource::read_watts() -> double
{
  if (!impl_) {
    impl_ = std::make_unique<Impl>(base_url_);
  }
  auto res = impl_->client.Get("/mock/state");
  if (!res || res->status != 200) {
    throw Error(ErrorCode::SourceInitFailure,
                "cannot read mock power from " + base_url_);
  }
  const auto doc = json::parse(res->body, nullptr, false);
  if (doc.is_discarded() || !doc.contains("power_watts")) {
    throw Error(ErrorCode::SourceInitFailure, "malformed /mock/state reply");
  }
  return doc["power_watts"].get<double>();
}

auto
fetch_inflight_log(const std::string& base_url) -> MockStateSnapshot
{
  httplib::Client client(base_url);
  auto res = client.Get("/mock/inflight_log");
  if (!res || res->status != 200) {
    throw Error(ErrorCode::EndpointUnreachable,
                "cannot fetch inflight log from " + base_url);
  }
  const auto doc = json::parse(res->body);
  MockStateSnapshot snap;
  snap.capacity = doc.at("capacity").get<int>();
  snap.max_inflight = doc.at("max_inflight").get<int>();
  for (const auto& e : doc.at("events")) {
    snap.events.push_back(
        {Seconds(e.at("t").get<double>()), e.at("inflight").get<int>()});
  }
  return snap;
}

}  // namespace ebench
