#include "ebench/loadgen.hpp"

#include <httplib.h>

#include <atomic>
#include <cmath>
#include <memory>
#include <system_error>
#include <semaphore>
#include <thread>

#include <json.hpp>

#include "ebench/error.hpp"

namespace ebench {

using nlohmann::json;

auto
to_string(const RequestStatus& status) -> std::string
{
  switch (status.kind) {
    case RequestStatusKind::Ok: return "ok";
    case RequestStatusKind::HttpError:
      return "http_" + std::to_string(status.http_code);
    case RequestStatusKind::Timeout: return "timeout";
    case RequestStatusKind::TransportError: return "transport_error";
  }
  return "transport_error";
}

auto
parse_request_status(std::string_view text) -> RequestStatus
{
  if (text == "ok") {
    return {RequestStatusKind::Ok, 0};
  }
  if (text == "timeout") {
    return {RequestStatusKind::Timeout, 0};
  }
  if (text == "transport_error") {
    return {RequestStatusKind::TransportError, 0};
  }
  if (text.starts_with("http_")) {
    return {RequestStatusKind::HttpError,
            std::stoi(std::string(text.substr(5)))};
  }
  throw Error(ErrorCode::SchemaMismatch,
              "unknown request status '" + std::string(text) + "'");
}

auto
completion_request_body(const CompletionRequest& request) -> std::string
{
  json body = {
      {"model", request.model},
      {"prompt", request.prompt},
      {"max_tokens", request.max_tokens},
      {"temperature", request.temperature},
      {"stream", false},
  };
  return body.dump();
}

auto
parse_completion_response(std::string_view body)
    -> std::optional<CompletionResponse>
{
  const auto doc = json::parse(body, nullptr, /*allow_exceptions=*/false);
  if (doc.is_discarded() || !doc.is_object()) {
    return std::nullopt;
  }
  CompletionResponse out;
  if (doc.contains("choices") && doc["choices"].is_array() &&
      !doc["choices"].empty()) {
    const auto& first = doc["choices"][0];
    if (first.contains("text") && first["text"].is_string()) {
      out.text = first["text"].get<std::string>();
    }
  }
  else {
    return std::nullopt;
  }
  if (doc.contains("usage") && doc["usage"].is_object()) {
    out.completion_tokens = doc["usage"].value("completion_tokens", 0);
  }
  return out;
}

CompletionClient::CompletionClient(Endpoint endpoint)
    : endpoint_(std::move(endpoint))
{
}

auto
CompletionClient::send(const CompletionRequest& request,
                       std::size_t request_id) const -> RequestRecord
{
  httplib::Client http(endpoint_.base_url);
  const auto timeout_s = endpoint_.timeout.count();
  const auto sec = static_cast<time_t>(timeout_s);
  const auto usec = static_cast<time_t>((timeout_s - static_cast<double>(sec)) * 1e6);
  http.set_connection_timeout(sec, usec);
  http.set_read_timeout(sec, usec);
  http.set_write_timeout(sec, usec);
  http.set_keep_alive(false);

  httplib::Headers headers = {{"X-Request-Id", std::to_string(request_id)}};
  if (endpoint_.api_key) {
    headers.emplace("Authorization", "Bearer " + *endpoint_.api_key);
  }
  const auto body = completion_request_body(request);

  RequestRecord record;
  record.prompt_id = request_id;
  record.send_time = mono_now();
  auto result = http.Post(endpoint_.completions_path, headers, body,
                          "application/json");
  record.completion_time = mono_now();

  if (!result) {
    const auto err = result.error();
    const bool timed_out =
        err == httplib::Error::ConnectionTimeout ||
        (err == httplib::Error::Read &&
         record.completion_time - record.send_time >= endpoint_.timeout * 0.99);
    record.status.kind = timed_out ? RequestStatusKind::Timeout
                                   : RequestStatusKind::TransportError;
    return record;
  }
  if (result->status != 200) {
    record.status = {RequestStatusKind::HttpError, result->status};
    return record;
  }
  const auto parsed = parse_completion_response(result->body);
  if (!parsed) {
    record.status.kind = RequestStatusKind::TransportError;
    return record;
  }
  record.output_token_count = parsed->completion_tokens;
  return record;
}

namespace {

struct Job {
  std::size_t request_id;
  const std::string* prompt;
};

// One thread per job, each parked on its own semaphore so the submission
// loop only has to release them. Records land in the job's own slot.
auto
run_jobs(const CompletionClient& client, const std::string& model,
         const std::vector<Job>& jobs, const GenerationParams& params,
         std::optional<double> rate) -> std::vector<RequestRecord>
{
  const auto n = jobs.size();
  std::vector<RequestRecord> records(n);
  std::vector<std::unique_ptr<std::binary_semaphore>> gates;
  gates.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    gates.push_back(std::make_unique<std::binary_semaphore>(0));
  }

  std::atomic<bool> cancelled{false};
  std::vector<std::jthread> workers;
  workers.reserve(n);
  try {
    for (std::size_t i = 0; i < n; ++i) {
      workers.emplace_back([&, i] {
        CompletionRequest request{model, *jobs[i].prompt, params.max_tokens,
                                  params.temperature};
        gates[i]->acquire();
        if (cancelled.load()) {
          return;
        }
        records[i] = client.send(request, jobs[i].request_id);
      });
    }
  }
  catch (const std::system_error& e) {
    cancelled = true;
    for (std::size_t i = 0; i < workers.size(); ++i) {
      gates[i]->release();
    }
    workers.clear();
    throw Error(ErrorCode::Io, std::string("cannot spawn request workers: ") +
                                   e.what());
  }

  const auto t0 = SteadyClock::now();
  for (std::size_t i = 0; i < n; ++i) {
    if (rate) {
      std::this_thread::sleep_until(
          t0 + std::chrono::duration_cast<SteadyClock::duration>(
                   Seconds(static_cast<double>(i) / *rate)));
    }
    gates[i]->release();
  }
  workers.clear();  // joins
  return records;
}

auto
jobs_for(const RunSpec& spec, std::span<const Prompt> prompts) -> std::vector<Job>
{
  std::vector<Job> jobs;
  jobs.reserve(spec.prompt_ids.size());
  for (auto id : spec.prompt_ids) {
    if (id >= prompts.size() || prompts[id].id != id) {
      throw Error(ErrorCode::InsufficientPrompts,
                  "run " + spec.run_id + " references missing prompt " +
                      std::to_string(id));
    }
    jobs.push_back({id, &prompts[id].text});
  }
  return jobs;
}

void
require_success(const RunSpec& spec, const std::vector<RequestRecord>& records)
{
  if (records.empty()) {
    return;
  }
  std::size_t ok = 0;
  std::size_t transport = 0;
  for (const auto& r : records) {
    ok += r.status.ok() ? 1 : 0;
    transport += r.status.kind == RequestStatusKind::TransportError ? 1 : 0;
  }
  if (ok > 0) {
    return;
  }
  if (transport == records.size()) {
    throw Error(ErrorCode::EndpointUnreachable,
                "run " + spec.run_id + ": no request reached the endpoint");
  }
  throw Error(ErrorCode::AllRequestsFailed,
              "run " + spec.run_id + ": every request failed");
}

}  // namespace

auto
warmup(const CompletionClient& client, const std::string& model,
       std::span<const Prompt> prompts, int count,
       const GenerationParams& params) -> WarmupSummary
{
  WarmupSummary summary;
  summary.start = mono_now();
  if (count <= 0) {
    summary.end = mono_now();
    return summary;
  }
  if (prompts.empty()) {
    throw Error(ErrorCode::EmptyDataset, "warm-up needs at least one prompt");
  }
  std::vector<Job> jobs;
  jobs.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    const auto& p = prompts[static_cast<std::size_t>(i) % prompts.size()];
    jobs.push_back({p.id, &p.text});
  }
  const auto records = run_jobs(client, model, jobs, params, std::nullopt);
  summary.end = mono_now();
  summary.sent = count;
  std::size_t transport = 0;
  for (const auto& r : records) {
    summary.failures += r.status.ok() ? 0 : 1;
    transport += r.status.kind == RequestStatusKind::TransportError ? 1 : 0;
  }
  if (transport == records.size()) {
    throw Error(ErrorCode::EndpointUnreachable,
                "warm-up could not reach " + client.endpoint().base_url);
  }
  return summary;
}

auto
dispatch_burst(const CompletionClient& client, const RunSpec& spec,
               std::span<const Prompt> prompts, const GenerationParams& params)
    -> std::vector<RequestRecord>
{
  auto records =
      run_jobs(client, spec.model, jobs_for(spec, prompts), params, std::nullopt);
  require_success(spec, records);
  return records;
}

auto
dispatch_rate(const CompletionClient& client, const RunSpec& spec,
              std::span<const Prompt> prompts, double rate,
              const GenerationParams& params) -> std::vector<RequestRecord>
{
  if (!(rate > 0.0)) {
    throw Error(ErrorCode::NonPositiveRate, "dispatch rate must be > 0");
  }
  auto records = run_jobs(client, spec.model, jobs_for(spec, prompts), params,
                          std::isinf(rate) ? std::nullopt : std::optional(rate));
  require_success(spec, records);
  return records;
}

auto
dispatch(const CompletionClient& client, const RunSpec& spec,
         std::span<const Prompt> prompts, const GenerationParams& params)
    -> std::vector<RequestRecord>
{
  if (spec.dispatch.mode == DispatchMode::FixedRate) {
    return dispatch_rate(client, spec, prompts, spec.dispatch.rate.value_or(0.0),
                         params);
  }
  return dispatch_burst(client, spec, prompts, params);
}

}  // namespace ebench
