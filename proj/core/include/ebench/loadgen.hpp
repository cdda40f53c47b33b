#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ebench/clock.hpp"
#include "ebench/dataset.hpp"
#include "ebench/plan.hpp"

namespace ebench {

struct Endpoint {
  std::string base_url;  // scheme://host:port
  std::string completions_path = "/v1/completions";
  Seconds timeout{300.0};
  std::optional<std::string> api_key;
};

struct GenerationParams {
  int max_tokens = 128;
  double temperature = 0.0;
};

struct CompletionRequest {
  std::string model;
  std::string prompt;
  int max_tokens = 128;
  double temperature = 0.0;
};

enum class RequestStatusKind { Ok, HttpError, Timeout, TransportError };

struct RequestStatus {
  RequestStatusKind kind = RequestStatusKind::Ok;
  int http_code = 0;  // HttpError only

  [[nodiscard]] auto ok() const -> bool { return kind == RequestStatusKind::Ok; }
  friend auto operator==(const RequestStatus&, const RequestStatus&)
      -> bool = default;
};

auto to_string(const RequestStatus& status) -> std::string;
auto parse_request_status(std::string_view text) -> RequestStatus;

struct RequestRecord {
  std::size_t prompt_id = 0;
  Seconds send_time{};
  Seconds completion_time{};
  int output_token_count = 0;
  RequestStatus status;

  friend auto operator==(const RequestRecord&, const RequestRecord&)
      -> bool = default;
};

/// JSON body for the completions API.
auto completion_request_body(const CompletionRequest& request) -> std::string;

struct CompletionResponse {
  std::string text;
  int completion_tokens = 0;
};

/// Extracts choices[0].text and usage.completion_tokens; nullopt when the
/// body is not a completion response.
auto parse_completion_response(std::string_view body)
    -> std::optional<CompletionResponse>;

/// Blocking client for one OpenAI-compatible completions endpoint. Safe to
/// share across threads; each call opens its own connection.
class CompletionClient {
 public:
  explicit CompletionClient(Endpoint endpoint);

  [[nodiscard]] auto endpoint() const -> const Endpoint& { return endpoint_; }

  /// Sends one request and fills a record. `request_id` travels in the
  /// X-Request-Id header.
  [[nodiscard]] auto send(const CompletionRequest& request,
                          std::size_t request_id) const -> RequestRecord;

 private:
  Endpoint endpoint_;
};

struct WarmupSummary {
  int sent = 0;
  int failures = 0;
  Seconds start{};
  Seconds end{};

  friend auto operator==(const WarmupSummary&, const WarmupSummary&)
      -> bool = default;
};

/// Sends `count` unmeasured requests in one burst, cycling through the
/// prompts from the start, and waits for every one to finish. Throws
/// EndpointUnreachable when every request fails at the transport level.
auto warmup(const CompletionClient& client, const std::string& model,
            std::span<const Prompt> prompts, int count,
            const GenerationParams& params) -> WarmupSummary;

/// Releases all requests of `spec` with no pacing and waits until each is
/// terminal. Records come back in prompt order. Throws AllRequestsFailed
/// (EndpointUnreachable if all were transport errors) when nothing succeeded.
auto dispatch_burst(const CompletionClient& client, const RunSpec& spec,
                    std::span<const Prompt> prompts,
                    const GenerationParams& params) -> std::vector<RequestRecord>;

/// As dispatch_burst, but submission i is released at start + i / rate.
auto dispatch_rate(const CompletionClient& client, const RunSpec& spec,
                   std::span<const Prompt> prompts, double rate,
                   const GenerationParams& params) -> std::vector<RequestRecord>;

/// Routes to burst or rate dispatch according to spec.dispatch.
auto dispatch(const CompletionClient& client, const RunSpec& spec,
              std::span<const Prompt> prompts, const GenerationParams& params)
    -> std::vector<RequestRecord>;

}  // namespace ebench
