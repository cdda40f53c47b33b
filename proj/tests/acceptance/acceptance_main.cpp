// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
// criterion fails.

#include <signal.h>
#include <spawn.h>
#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "ebench/ebench.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

extern char** environ;

namespace {

using namespace ebench;

struct Outcome {
  bool pass = false;
  std::string detail;
};

auto
rel_err(double got, double want) -> double
{
  return std::abs(got - want) / std::max(std::abs(want), 1e-300);
}

auto
fmt(double v, int prec = 4) -> std::string
{
  std::ostringstream s;
  s.precision(prec);
  s << v;
  return s.str();
}

// Shared mock sweep: C=100, d=0.2 s, interval d/20, default warm-up.
struct Sweep {
  MockConfig mock;
  Report report;
  double wall_s = 0.0;
  std::size_t handled = 0;
  int max_inflight = 0;
};

auto
run_sweep() -> Sweep
{
  Sweep sw;
  sw.mock.capacity = 100;
  sw.mock.per_request_duration = Seconds(0.2);
  sw.mock.idle_power = 100.0;
  sw.mock.peak_power = 300.0;
  testing::TempDir tmp;
  MockServer server(sw.mock);

  BenchConfig cfg;
  cfg.endpoint_url = server.base_url();
  cfg.models = {"pythia-70m"};
  cfg.request_loads = {5, 10, 20, 40, 100, 200, 500};
  cfg.dataset_path = tmp.write("hs.jsonl", testing::hellaswag_lines(600));
  cfg.sample_interval = Seconds(0.2 / 20);
  cfg.max_output_tokens = 16;
  cfg.power_sources = {"mock-http"};

  const CompletionClient client(
      Endpoint{cfg.endpoint_url, "/v1/completions", Seconds(60), std::nullopt});
  const std::vector<PowerSourcePtr> sources{
      std::make_shared<MockPowerSource>(server.backend())};
  const auto t0 = std::chrono::steady_clock::now();
  sw.report = run_benchmark(cfg, client, sources);
  sw.wall_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  sw.handled = server.backend().requests_handled();
  sw.max_inflight = fetch_inflight_log(server.base_url()).max_inflight;
  return sw;
}

auto
plateau_reproduction(const Sweep& sw) -> Outcome
{
  const auto& pts = sw.report.derived.series.at(0).points;
  std::ostringstream d;
  bool ok = sw.wall_s < 120.0;
  double at_cap = 0.0;
  for (const auto& p : pts) {
    if (p.load == 100) {
      at_cap = p.mean;
    }
  }
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const double oracle = analytic_energy_per_request(pts[i].load, sw.mock);
    const double err = rel_err(pts[i].mean, oracle);
    ok = ok && err <= 0.10;
    if (pts[i].load <= 100 && i > 0) {
      ok = ok && pts[i].mean < pts[i - 1].mean;
    }
    if (pts[i].load > 100) {
      ok = ok && rel_err(pts[i].mean, at_cap) <= 0.05;
    }
    d << "N=" << pts[i].load << ":" << fmt(pts[i].mean) << "/" << fmt(oracle) << " ";
  }
  d << "J (measured/oracle), " << fmt(sw.wall_s, 3) << " s";
  return {ok && pts.size() == 7, d.str()};
}

auto
integration_oracle() -> Outcome
{
  std::mt19937_64 rng(2024);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const auto t = oracle::random_trace(rng);
    std::vector<PowerSample> samples;
    for (std::size_t k = 0; k < t.times.size(); ++k) {
      samples.push_back({"s", Seconds(t.times[k]), t.power[k]});
    }
    const double want = static_cast<double>(oracle::brute_force_energy(t, t.times.front()));
    const double got =
        integrate_energy(samples, {Seconds(t.times.front()), Seconds(t.window_end)}).total;
    worst = std::max(worst, want == 0.0 ? std::abs(got) : rel_err(got, want));
  }
  return {worst <= 1e-9, "1000 traces, worst rel err " + fmt(worst, 3)};
}

auto
emissions_arithmetic() -> Outcome
{
  const auto e = estimate_emissions(3.6e6, {400.0, 1.5});
  bool ok = e.grams_co2eq == 600.0;
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> joules(0.0, 1e9), k(0.0, 1e3),
      intensity(0.0, 1000.0), pue(1.0, 3.0);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const GridProfile g{intensity(rng), pue(rng)};
    const double j = joules(rng);
    const double s = k(rng);
    const double a = estimate_emissions(s * j, g).grams_co2eq;
    const double b = s * estimate_emissions(j, g).grams_co2eq;
    worst = std::max(worst, b == 0.0 ? std::abs(a) : rel_err(a, b));
  }
  ok = ok && worst <= 1e-12;
  return {ok, "3.6e6 J @400 g/kWh PUE 1.5 -> " + fmt(e.grams_co2eq, 17) +
                  " g, linearity worst rel err " + fmt(worst, 3)};
}

auto
determinism() -> Outcome
{
  testing::TempDir tmp;
  const auto path = tmp.write("hs.jsonl", testing::hellaswag_lines(250));
  BenchConfig cfg;
  cfg.models = {"pythia-1b", "pythia-70m"};
  cfg.request_loads = {200, 5, 40};
  cfg.repeats = 3;
  cfg.dataset_path = path;
  auto once = [&] {
    const auto prompts = load_prompts(path, PromptFormat::HellaSwagJsonl);
    const auto plan = plan_runs(cfg, prompts);
    std::string seq;
    for (const auto& p : prompts) {
      seq += std::to_string(p.id) + '\x1f' + p.text + '\x1e';
    }
    return std::make_pair(seq, plan_to_json(plan));
  };
  const auto a = once();
  const auto b = once();
  const bool ok = a == b && !a.second.empty();
  return {ok, "plan " + std::to_string(a.second.size()) + " bytes, prompts " +
                  std::to_string(a.first.size()) + " bytes, identical=" +
                  (ok ? "yes" : "no")};
}

auto
window_correctness(const Sweep& sw) -> Outcome
{
  bool ok = true;
  std::size_t measured = 0;
  std::size_t warm = 0;
  for (const auto& r : sw.report.runs) {
    if (r.records.size() != static_cast<std::size_t>(r.spec.request_count)) {
      ok = false;
    }
    for (std::size_t i = 0; i < r.records.size(); ++i) {
      const auto& rec = r.records[i];
      ok = ok && rec.prompt_id == r.spec.prompt_ids[i];
      ok = ok && r.warmup.end <= r.window.start;
      ok = ok && r.window.start <= rec.send_time;
      ok = ok && rec.completion_time <= r.window.end;
    }
    ok = ok && r.warmup.sent == 200;
    measured += r.records.size();
    warm += static_cast<std::size_t>(r.warmup.sent);
  }
  // The mock saw exactly warm-up + measured requests, and only the measured
  // ones were recorded.
  ok = ok && sw.handled == measured + warm;
  return {ok, std::to_string(sw.report.runs.size()) + " runs, " +
                  std::to_string(measured) + " measured, " + std::to_string(warm) +
                  " warm-up requests"};
}

auto
aggregation_oracle() -> Outcome
{
  const std::vector<double> hand = {1.0, 2.0, 3.0};
  const auto h = aggregate_repeats(hand);
  bool ok = h.mean == 2.0 && h.stddev == 1.0;
  std::mt19937_64 rng(99);
  std::uniform_int_distribution<int> len(2, 50);
  std::uniform_real_distribution<double> val(0.0, 500.0);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    std::vector<double> v(static_cast<std::size_t>(len(rng)));
    for (auto& x : v) {
      x = val(rng);
    }
    const auto s = aggregate_repeats(v);
    const auto [mean, sd] = oracle::two_pass_stats(v);
    worst = std::max({worst, rel_err(s.mean, mean), rel_err(s.stddev, sd)});
  }
  ok = ok && worst <= 1e-12;
  return {ok, "[1,2,3] -> (" + fmt(h.mean) + ", " + fmt(h.stddev) +
                  "), 1000 vectors worst rel err " + fmt(worst, 3)};
}

auto
linear_fit_oracle() -> Outcome
{
  const std::vector<ParamPoint> line = {{70e6, 1.14}, {160e6, 1.32}, {410e6, 1.82},
                                        {1e9, 3.0},   {2.8e9, 6.6},  {6.9e9, 14.8}};
  const auto exact = fit_params_vs_energy(line);

  const std::vector<double> params = {70e6, 160e6, 410e6, 1e9, 1.4e9, 2.8e9, 6.9e9};
  std::vector<ParamPoint> pts;
  std::vector<std::pair<double, double>> raw;
  for (double p : params) {
    // 410M costs as much as 1B: same layer count.
    const double y = p == 410e6 ? 1.0 + 2e-9 * 1e9 : 1.0 + 2e-9 * p;
    pts.push_back({p, y});
    raw.emplace_back(p, y);
  }
  const auto fit = fit_params_vs_energy(pts);
  const auto res = fit_residuals(fit, pts);
  const auto ref = oracle::normal_equations_fit(raw);
  double worst = 0.0;
  for (std::size_t i = 0; i < res.size(); ++i) {
    worst = std::max(worst, std::abs(res[i] - static_cast<double>(ref.residuals[i])));
  }
  const bool ok = std::abs(exact.r_squared - 1.0) <= 1e-12 && worst <= 1e-9;
  return {ok, "exact-line r2=" + fmt(exact.r_squared, 15) + ", anomaly r2=" +
                  fmt(fit.r_squared) + ", worst residual diff " + fmt(worst, 3)};
}

auto
burst_semantics(const Sweep& sw) -> Outcome
{
  MockConfig cfg;
  cfg.capacity = 100;
  cfg.per_request_duration = Seconds(0.2);
  MockServer server(cfg);
  const CompletionClient client(
      Endpoint{server.base_url(), "/v1/completions", Seconds(30), std::nullopt});
  std::vector<Prompt> prompts;
  RunSpec spec;
  spec.run_id = "m/n100/r0";
  spec.model = "m";
  spec.request_count = 100;
  for (std::size_t i = 0; i < 100; ++i) {
    prompts.push_back({i, "prompt " + std::to_string(i)});
    spec.prompt_ids.push_back(i);
  }
  double worst_spread = 0.0;
  for (int k = 0; k < 3; ++k) {
    const auto recs = dispatch_burst(client, spec, prompts, {16, 0.0});
    auto [lo, hi] = std::minmax_element(recs.begin(), recs.end(), [](auto& a, auto& b) {
      return a.send_time < b.send_time;
    });
    worst_spread = std::max(worst_spread, (hi->send_time - lo->send_time).count());
  }
  const auto log = fetch_inflight_log(server.base_url());
  int peak = log.max_inflight;
  for (const auto& e : log.events) {
    peak = std::max(peak, e.inflight);
  }
  const bool ok = worst_spread < 0.1 * 0.2 && peak <= 100 && sw.max_inflight <= 100;
  return {ok, "spread " + fmt(worst_spread * 1e3, 3) + " ms (< 20 ms), max inflight " +
                  std::to_string(peak) + " / sweep " + std::to_string(sw.max_inflight) +
                  " (C=100)"};
}

// Starts the CLI against a slow mock and SIGKILLs it mid-run.
auto
killed_run_leaves_no_report() -> bool
{
  testing::TempDir tmp;
  MockConfig cfg;
  cfg.capacity = 10;
  cfg.per_request_duration = Seconds(2.0);
  MockServer server(cfg);
  const auto data = tmp.write("hs.jsonl", testing::hellaswag_lines(10));
  const auto out = tmp.path() / "out";
  std::filesystem::create_directories(out);
  const std::string report = (out / "report.json").string();
  std::vector<std::string> args = {EBENCH_CLI_PATH, "run",  "-q",
                                   "--endpoint",    server.base_url(),
                                   "--models",      "pythia-70m",
                                   "--loads",       "5",
                                   "--warmup",      "0",
                                   "--dataset",     data.string(),
                                   "--power-source", "constant:10",
                                   "--sample-interval", "0.05",
                                   "--out",         report};
  std::vector<char*> argv;
  for (auto& a : args) {
    argv.push_back(a.data());
  }
  argv.push_back(nullptr);
  pid_t pid = 0;
  if (posix_spawn(&pid, argv[0], nullptr, nullptr, argv.data(), environ) != 0) {
    return false;
  }
  std::this_thread::sleep_for(std::chrono::milliseconds(800));
  kill(pid, SIGKILL);
  int status = 0;
  waitpid(pid, &status, 0);
  return WIFSIGNALED(status) && std::filesystem::is_empty(out);
}

auto
report_round_trip(const Sweep& sw) -> Outcome
{
  const auto text = report_to_json(sw.report);
  const auto parsed = parse_report(text);
  const auto again = rederive(parsed);
  const bool same = parsed.runs == sw.report.runs && parsed.derived == sw.report.derived &&
                    again.derived == sw.report.derived && again.runs == sw.report.runs;

  testing::TempDir tmp;
  const auto target = tmp.path() / "report.json";
  bool atomic = false;
  try {
    write_file_atomic(target, [&](std::ostream& out) {
      out << text.substr(0, text.size() / 2);
      throw std::runtime_error("interrupted");
    });
  }
  catch (const std::runtime_error&) {
    atomic = std::filesystem::is_empty(tmp.path());
  }
  const bool killed = killed_run_leaves_no_report();
  return {same && atomic && killed,
          std::string("round-trip identical=") + (same ? "yes" : "no") +
              ", interrupted write leaves nothing=" + (atomic ? "yes" : "no") +
              ", killed run leaves nothing=" + (killed ? "yes" : "no")};
}

}  // namespace

auto
main() -> int
{
  std::optional<Sweep> sweep;
  std::string sweep_error;
  try {
    sweep = run_sweep();
  }
  catch (const std::exception& e) {
    sweep_error = e.what();
  }
  auto with_sweep = [&](auto fn) -> std::function<Outcome()> {
    return [&, fn] {
      if (!sweep) {
        return Outcome{false, "mock sweep failed: " + sweep_error};
      }
      return fn(*sweep);
    };
  };

  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"plateau reproduction", with_sweep(plateau_reproduction)},
      {"integration oracle", integration_oracle},
      {"emissions arithmetic", emissions_arithmetic},
      {"determinism", determinism},
      {"window correctness", with_sweep(window_correctness)},
      {"aggregation oracle", aggregation_oracle},
      {"linear-fit oracle", linear_fit_oracle},
      {"burst semantics", with_sweep(burst_semantics)},
      {"report round-trip", with_sweep(report_round_trip)},
  };

  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    }
    catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += o.pass ? 0 : 1;
    std::cout << (o.pass ? "PASS" : "FAIL") << " [" << i + 1 << "] "
              << criteria[i].first << ": " << o.detail << std::endl;
  }
  return failed == 0 ? 0 : 1;
}
