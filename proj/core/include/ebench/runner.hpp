#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "ebench/analysis.hpp"
#include "ebench/config.hpp"
#include "ebench/energy.hpp"
#include "ebench/loadgen.hpp"
#include "ebench/plan.hpp"
#include "ebench/report.hpp"

namespace ebench {

/// Builds a power source from a spec string:
///   constant:<watts> | constant:<id>:<watts>
///   mock-http | mock-http:<base url>   (defaults to the config endpoint)
///   rapl | rapl:<powercap zone dir>
///   nvidia-smi | nvidia-smi:<gpu index>
auto make_power_source(const std::string& spec, const BenchConfig& config)
    -> PowerSourcePtr;

struct RunHooks {
  std::function<void(const RunSpec&)> on_run_start;
  std::function<void(const RunResult&)> on_run_done;
};

/// One run, strictly ordered: warm-up, tracker start, dispatch, tracker
/// stop after the last completion, then integration and emissions. Errors
/// are rethrown with the run id prefixed.
auto execute_run(const RunSpec& spec, std::span<const Prompt> prompts,
                 const CompletionClient& client,
                 const std::vector<PowerSourcePtr>& sources,
                 const BenchConfig& config) -> RunResult;

/// Executes the plan sequentially.
auto execute_plan(std::span<const RunSpec> plan, std::span<const Prompt> prompts,
                  const CompletionClient& client,
                  const std::vector<PowerSourcePtr>& sources,
                  const BenchConfig& config, const RunHooks& hooks = {})
    -> std::vector<RunResult>;

/// Loads prompts, plans, executes and assembles the report for `config`.
auto run_benchmark(const BenchConfig& config, const CompletionClient& client,
                   const std::vector<PowerSourcePtr>& sources,
                   const RunHooks& hooks = {}) -> Report;

}  // namespace ebench
