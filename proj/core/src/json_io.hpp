#pragma once

// nlohmann/json bindings shared by config.cpp and report.cpp. Kept out of
// the public headers.

#include <json.hpp>

#include "ebench/analysis.hpp"
#include "ebench/config.hpp"
#include "ebench/energy.hpp"
#include "ebench/loadgen.hpp"
#include "ebench/plan.hpp"

namespace ebench::detail {

auto config_to_json_value(const BenchConfig& config) -> nlohmann::json;
auto config_from_json_value(const nlohmann::json& doc) -> BenchConfig;

auto dispatch_to_json(const DispatchPolicy& policy) -> nlohmann::json;
auto dispatch_from_json(const nlohmann::json& doc) -> DispatchPolicy;

auto run_spec_to_json(const RunSpec& spec) -> nlohmann::json;
auto run_spec_from_json(const nlohmann::json& doc) -> RunSpec;

}  // namespace ebench::detail
