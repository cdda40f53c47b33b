// ebench: energy-per-request benchmarking for OpenAI-compatible LLM
// serving endpoints.
//
//   ebench run    --config bench.json [overrides...] --out report.json
//   ebench mock   --port 8000 --capacity 100 --duration 2
//   ebench report --in report.json --format table|csv|json [--out-dir plots/]

#include <csignal>
#include <cstdlib>
#include <iostream>
#include <pthread.h>

#include <CLI11.hpp>

#include "ebench/ebench.hpp"

namespace {

enum ExitCode : int {
  kOk = 0,
  kConfigError = 1,
  kEndpointFailure = 2,
  kPartialFailure = 3,
};

auto
exit_code_for(ebench::ErrorCode code) -> int
{
  using ebench::ErrorCode;
  switch (code) {
    case ErrorCode::EndpointUnreachable:
    case ErrorCode::AllRequestsFailed:
    case ErrorCode::SourceInitFailure:
    case ErrorCode::PortInUse:
      return kEndpointFailure;
    default:
      return kConfigError;
  }
}

auto
env_or(const char* name, const char* fallback = nullptr) -> std::optional<std::string>
{
  if (const char* v = std::getenv(name); v != nullptr && *v != '\0') {
    return std::string(v);
  }
  if (fallback != nullptr) {
    if (const char* v = std::getenv(fallback); v != nullptr && *v != '\0') {
      return std::string(v);
    }
  }
  return std::nullopt;
}

struct RunOptions {
  std::string config_path;
  std::optional<std::string> endpoint;
  std::vector<std::string> models;
  std::vector<int> loads;
  std::optional<int> warmup;
  std::optional<int> repeats;
  std::optional<std::string> dataset;
  std::optional<std::string> dataset_format;
  std::optional<int> max_prompts;
  std::optional<double> rate;
  std::optional<double> sample_interval;
  std::optional<int> max_tokens;
  std::optional<double> temperature;
  std::optional<double> timeout;
  std::optional<double> intensity;
  std::optional<double> pue;
  std::vector<std::string> power_sources;
  std::optional<int> fit_load;
  std::string out = "report.json";
  std::string plot_dir;
  bool quiet = false;
};

auto
build_config(const RunOptions& o) -> ebench::BenchConfig
{
  ebench::BenchConfig cfg;
  if (!o.config_path.empty()) {
    cfg = ebench::load_config_file(o.config_path);
  }
  if (auto env = env_or("EBENCH_ENDPOINT")) {
    cfg.endpoint_url = *env;
  }
  if (o.endpoint) cfg.endpoint_url = *o.endpoint;
  if (!o.models.empty()) cfg.models = o.models;
  if (!o.loads.empty()) cfg.request_loads = o.loads;
  if (o.warmup) cfg.warmup_count = *o.warmup;
  if (o.repeats) cfg.repeats = *o.repeats;
  if (o.dataset) cfg.dataset_path = *o.dataset;
  if (o.dataset_format) cfg.dataset_format = ebench::parse_prompt_format(*o.dataset_format);
  if (o.max_prompts) cfg.max_prompts = *o.max_prompts;
  if (o.rate) cfg.dispatch = ebench::DispatchPolicy::fixed_rate(*o.rate);
  if (o.sample_interval) cfg.sample_interval = ebench::Seconds(*o.sample_interval);
  if (o.max_tokens) cfg.max_output_tokens = *o.max_tokens;
  if (o.temperature) cfg.temperature = *o.temperature;
  if (o.timeout) cfg.request_timeout = ebench::Seconds(*o.timeout);
  if (o.intensity) cfg.grid.carbon_intensity = *o.intensity;
  if (o.pue) cfg.grid.pue = *o.pue;
  if (!o.power_sources.empty()) cfg.power_sources = o.power_sources;
  if (o.fit_load) cfg.fit_load = *o.fit_load;
  return cfg;
}

auto
cmd_run(const RunOptions& o) -> int
{
  ebench::BenchConfig cfg;
  std::vector<ebench::PowerSourcePtr> sources;
  try {
    cfg = ebench::validate_config(build_config(o));
    if (cfg.power_sources.empty()) {
      throw ebench::Error(ebench::ErrorCode::NoSources,
                          "no power sources configured (use --power-source)");
    }
    for (const auto& spec : cfg.power_sources) {
      sources.push_back(ebench::make_power_source(spec, cfg));
    }
  }
  catch (const ebench::ConfigError& e) {
    for (const auto& v : e.violations()) {
      std::cerr << "config error: " << ebench::to_string(v.code) << ": "
                << v.message << "\n";
    }
    return kConfigError;
  }
  catch (const ebench::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kConfigError;
  }

  ebench::Endpoint endpoint;
  endpoint.base_url = cfg.endpoint_url;
  endpoint.timeout = cfg.request_timeout;
  endpoint.api_key = env_or("EBENCH_API_KEY", "OPENAI_API_KEY");
  const ebench::CompletionClient client(endpoint);

  ebench::RunHooks hooks;
  if (!o.quiet) {
    hooks.on_run_start = [](const ebench::RunSpec& spec) {
      std::cerr << "[run] " << spec.run_id << " (warm-up " << spec.warmup_count
                << ", " << spec.request_count << " requests)\n";
    };
    hooks.on_run_done = [](const ebench::RunResult& r) {
      std::cerr << "[done] " << r.spec.run_id << ": " << r.energy.total << " J, "
                << ebench::energy_per_request(r) << " J/request, "
                << r.failures() << " failures\n";
    };
  }

  ebench::Report report;
  try {
    report = ebench::run_benchmark(cfg, client, sources, hooks);
    ebench::write_report(o.out, report);
    if (!o.plot_dir.empty()) {
      ebench::write_plot_data(report, o.plot_dir);
    }
  }
  catch (const ebench::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e.code());
  }
  catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kEndpointFailure;
  }

  if (!o.quiet) {
    ebench::write_summary(std::cout, report);
    std::cout << "report written to " << o.out << "\n";
  }
  return report.derived.failed_requests > 0 ? kPartialFailure : kOk;
}

struct MockOptions {
  std::string host = "127.0.0.1";
  int port = 8000;
  int capacity = 100;
  double duration = 2.0;
  int tokens = 16;
  double idle_power = 100.0;
  double peak_power = 300.0;
  int fault_every = 0;
  int workers = 1024;
};

auto
cmd_mock(const MockOptions& o) -> int
{
  // Handle SIGINT/SIGTERM synchronously; block them before any thread starts.
  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  ebench::MockConfig cfg;
  cfg.capacity = o.capacity;
  cfg.per_request_duration = ebench::Seconds(o.duration);
  cfg.tokens_per_response = o.tokens;
  cfg.idle_power = o.idle_power;
  cfg.peak_power = o.peak_power;
  cfg.faults.every = o.fault_every;
  try {
    ebench::MockServer server(cfg, o.host, o.port, o.workers);
    std::cout << "mock serving on " << server.base_url() << " (C=" << cfg.capacity
              << ", d=" << o.duration << " s)" << std::endl;
    int sig = 0;
    sigwait(&signals, &sig);
    std::cout << "stopping after " << server.backend().requests_handled()
              << " requests" << std::endl;
    server.stop();
  }
  catch (const ebench::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e.code());
  }
  return kOk;
}

struct ReportOptions {
  std::string in;
  std::string format = "table";
  std::string out_dir;
  bool verify = false;
};

auto
cmd_report(const ReportOptions& o) -> int
{
  try {
    const auto report = ebench::load_report(o.in);
    if (o.verify) {
      const auto again = ebench::rederive(report);
      if (!(again.derived == report.derived)) {
        std::cerr << "verify: re-derived metrics differ from the report\n";
        return kConfigError;
      }
      std::cerr << "verify: re-derived metrics match\n";
    }
    if (o.format == "table") {
      ebench::write_summary(std::cout, report);
    }
    else if (o.format == "json") {
      std::cout << ebench::report_to_json(report) << "\n";
    }
    else if (o.format == "csv") {
      if (o.out_dir.empty()) {
        ebench::write_series_csv(std::cout, report.derived);
      }
    }
    else {
      std::cerr << "unknown format '" << o.format << "'\n";
      return kConfigError;
    }
    if (!o.out_dir.empty()) {
      for (const auto& p : ebench::write_plot_data(report, o.out_dir)) {
        std::cout << "wrote " << p.string() << "\n";
      }
    }
  }
  catch (const ebench::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kConfigError;
  }
  return kOk;
}

}  // namespace

int
main(int argc, char** argv)
{
  CLI::App app{"LLM serving energy-efficiency benchmark"};
  app.set_version_flag("--version", ebench::tool_version());
  app.require_subcommand(1);

  RunOptions run;
  auto* run_cmd = app.add_subcommand("run", "warm up, measure and report every planned run");
  run_cmd->add_option("-c,--config", run.config_path, "JSON config file");
  run_cmd->add_option("--endpoint", run.endpoint, "base URL of the completions server");
  run_cmd->add_option("--models", run.models, "model identifiers")->delimiter(',');
  run_cmd->add_option("--loads", run.loads, "request loads (requests per run)")->delimiter(',');
  run_cmd->add_option("--warmup", run.warmup, "warm-up requests per run (default 200)");
  run_cmd->add_option("--repeats", run.repeats, "repeats per (model, load)");
  run_cmd->add_option("--dataset", run.dataset, "prompt dataset path");
  run_cmd->add_option("--dataset-format", run.dataset_format, "hellaswag | lines");
  run_cmd->add_option("--max-prompts", run.max_prompts, "read at most this many prompts");
  run_cmd->add_option("--rate", run.rate, "fixed request rate (req/s); default burst");
  run_cmd->add_option("--sample-interval", run.sample_interval, "power sampling interval in seconds (default 15)");
  run_cmd->add_option("--max-tokens", run.max_tokens, "max output tokens per request");
  run_cmd->add_option("--temperature", run.temperature, "sampling temperature");
  run_cmd->add_option("--timeout", run.timeout, "per-request timeout in seconds");
  run_cmd->add_option("--intensity", run.intensity, "grid carbon intensity, g CO2eq/kWh");
  run_cmd->add_option("--pue", run.pue, "power usage effectiveness (>= 1)");
  run_cmd->add_option("--power-source", run.power_sources,
                      "constant:W | mock-http[:url] | rapl[:zone] | nvidia-smi[:gpu]");
  run_cmd->add_option("--fit-load", run.fit_load, "load used for the params-vs-energy fit");
  run_cmd->add_option("-o,--out", run.out, "report path")->capture_default_str();
  run_cmd->add_option("--plot-dir", run.plot_dir, "also write plot-data CSVs here");
  run_cmd->add_flag("-q,--quiet", run.quiet, "no progress output");

  MockOptions mock;
  auto* mock_cmd = app.add_subcommand("mock", "serve the deterministic mock backend");
  mock_cmd->add_option("--host", mock.host)->capture_default_str();
  mock_cmd->add_option("--port", mock.port)->capture_default_str();
  mock_cmd->add_option("--capacity", mock.capacity, "max concurrent requests")->capture_default_str();
  mock_cmd->add_option("--duration", mock.duration, "service time per request, seconds")->capture_default_str();
  mock_cmd->add_option("--tokens", mock.tokens, "tokens per response")->capture_default_str();
  mock_cmd->add_option("--idle-power", mock.idle_power, "W")->capture_default_str();
  mock_cmd->add_option("--peak-power", mock.peak_power, "W above idle at full occupancy")->capture_default_str();
  mock_cmd->add_option("--fault-every", mock.fault_every, "fail every k-th request with HTTP 500 (0 = never)")->capture_default_str();
  mock_cmd->add_option("--workers", mock.workers, "HTTP worker threads")->capture_default_str();

  ReportOptions rep;
  auto* report_cmd = app.add_subcommand("report", "summarize a report or export plot data");
  report_cmd->add_option("-i,--in", rep.in, "report path")->required();
  report_cmd->add_option("-f,--format", rep.format, "table | csv | json")->capture_default_str();
  report_cmd->add_option("-d,--out-dir", rep.out_dir, "write series/params/models/samples CSVs here");
  report_cmd->add_flag("--verify", rep.verify, "re-derive all metrics from raw samples and compare");

  try {
    app.parse(argc, argv);
  }
  catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kConfigError;
  }

  if (*run_cmd) return cmd_run(run);
  if (*mock_cmd) return cmd_mock(mock);
  if (*report_cmd) return cmd_report(rep);
  return kConfigError;
}
