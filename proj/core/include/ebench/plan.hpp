#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "ebench/config.hpp"
#include "ebench/dataset.hpp"

namespace ebench {

/// One benchmark run. `prompt_ids` are always the first `request_count`
/// prompt ids in dataset order.
struct RunSpec {
  std::string run_id;
  std::string model;
  int request_count = 0;
  DispatchPolicy dispatch;
  int warmup_count = 0;
  int repeat_index = 0;
  std::vector<std::size_t> prompt_ids;

  friend auto operator==(const RunSpec&, const RunSpec&) -> bool = default;
};

/// Expands a validated config into models x loads x repeats runs, ordered
/// by configured model order, then ascending load, then repeat index.
/// Throws InsufficientPrompts when the dataset is shorter than the largest
/// load.
auto plan_runs(const BenchConfig& config, std::span<const Prompt> prompts)
    -> std::vector<RunSpec>;

/// Canonical text form of a plan; identical plans give identical bytes.
auto plan_to_json(std::span<const RunSpec> plan) -> std::string;

}  // namespace ebench
