#include "ebench/runner.hpp"

#include <charconv>

#include "ebench/error.hpp"
#include "ebench/mockserv.hpp"
#ifdef EBENCH_HARDWARE_SOURCES
#include "ebench/hw_sources.hpp"
#endif

namespace ebench {

namespace {

auto
parse_double(std::string_view text, const std::string& context) -> double
{
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw Error(ErrorCode::InvalidConfig, "bad number in '" + context + "'");
  }
  return v;
}

}  // namespace

auto
make_power_source(const std::string& spec, const BenchConfig& config)
    -> PowerSourcePtr
{
  const auto colon = spec.find(':');
  const auto kind = spec.substr(0, colon);
  const auto arg =
      colon == std::string::npos ? std::string() : spec.substr(colon + 1);

  if (kind == "constant") {
    const auto second = arg.find(':');
    if (second == std::string::npos) {
      return std::make_shared<ConstantSource>("constant", parse_double(arg, spec));
    }
    return std::make_shared<ConstantSource>(
        arg.substr(0, second), parse_double(arg.substr(second + 1), spec));
  }
  if (kind == "mock-http") {
    return std::make_shared<HttpMockPowerSource>(arg.empty() ? config.endpoint_url
                                                             : arg);
  }
#ifdef EBENCH_HARDWARE_SOURCES
  if (kind == "rapl") {
    return arg.empty() ? std::make_shared<RaplSource>()
                       : std::make_shared<RaplSource>(arg);
  }
  if (kind == "nvidia-smi") {
    return std::make_shared<NvidiaSmiSource>(
        arg.empty() ? 0 : static_cast<int>(parse_double(arg, spec)));
  }
#endif
  throw Error(ErrorCode::InvalidConfig, "unknown power source '" + spec + "'");
}

auto
execute_run(const RunSpec& spec, std::span<const Prompt> prompts,
            const CompletionClient& client,
            const std::vector<PowerSourcePtr>& sources, const BenchConfig& config)
    -> RunResult
{
  const GenerationParams params{config.max_output_tokens, config.temperature};
  try {
    RunResult result;
    result.spec = spec;
    result.warmup = warmup(client, spec.model, prompts, spec.warmup_count, params);

    auto tracker = PowerTracker::start(sources, config.sample_interval);
    result.records = dispatch(client, spec, prompts, params);
    auto reading = tracker->stop();

    result.window = reading.window;
    result.samples = std::move(reading.samples);
    result.energy = integrate_energy(result.samples, result.window);
    result.emissions = estimate_emissions(result.energy.total, config.grid);
    return result;
  }
  catch (const Error& e) {
    throw Error(e.code(), "run " + spec.run_id + ": " + e.what(), e.line());
  }
}

auto
execute_plan(std::span<const RunSpec> plan, std::span<const Prompt> prompts,
             const CompletionClient& client,
             const std::vector<PowerSourcePtr>& sources, const BenchConfig& config,
             const RunHooks& hooks) -> std::vector<RunResult>
{
  std::vector<RunResult> results;
  results.reserve(plan.size());
  for (const auto& spec : plan) {
    if (hooks.on_run_start) {
      hooks.on_run_start(spec);
    }
    results.push_back(execute_run(spec, prompts, client, sources, config));
    if (hooks.on_run_done) {
      hooks.on_run_done(results.back());
    }
  }
  return results;
}

auto
run_benchmark(const BenchConfig& config, const CompletionClient& client,
              const std::vector<PowerSourcePtr>& sources, const RunHooks& hooks)
    -> Report
{
  const auto valid = validate_config(config);
  std::optional<std::size_t> limit;
  if (valid.max_prompts) {
    limit = static_cast<std::size_t>(*valid.max_prompts);
  }
  const auto prompts = load_prompts(valid.dataset_path, valid.dataset_format, limit);
  const auto plan = plan_runs(valid, prompts);

  Report report;
  report.tool_version = tool_version();
  report.started_utc = utc_timestamp_now();
  report.config = valid;
  report.runs = execute_plan(plan, prompts, client, sources, valid, hooks);
  report.finished_utc = utc_timestamp_now();
  report.derived = derive_metrics(valid, report.runs);
  return report;
}

}  // namespace ebench
