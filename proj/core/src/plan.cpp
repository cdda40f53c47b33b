#include "ebench/plan.hpp"

#include <algorithm>

#include "json_io.hpp"

namespace ebench {

auto
plan_runs(const BenchConfig& config, std::span<const Prompt> prompts)
    -> std::vector<RunSpec>
{
  auto loads = config.request_loads;
  std::sort(loads.begin(), loads.end());
  if (!loads.empty() &&
      prompts.size() < static_cast<std::size_t>(loads.back())) {
    throw Error(ErrorCode::InsufficientPrompts,
                "largest load is " + std::to_string(loads.back()) +
                    " but only " + std::to_string(prompts.size()) +
                    " prompts are available");
  }

  std::vector<RunSpec> plan;
  plan.reserve(config.models.size() * loads.size() *
               static_cast<std::size_t>(std::max(config.repeats, 0)));
  for (const auto& model : config.models) {
    for (int load : loads) {
      std::vector<std::size_t> ids;
      ids.reserve(static_cast<std::size_t>(load));
      for (std::size_t i = 0; i < static_cast<std::size_t>(load); ++i) {
        ids.push_back(prompts[i].id);
      }
      for (int r = 0; r < config.repeats; ++r) {
        RunSpec spec;
        spec.run_id = model + "/n" + std::to_string(load) + "/r" +
                      std::to_string(r);
        spec.model = model;
        spec.request_count = load;
        spec.dispatch = config.dispatch;
        spec.warmup_count = config.warmup_count;
        spec.repeat_index = r;
        spec.prompt_ids = ids;
        plan.push_back(std::move(spec));
      }
    }
  }
  return plan;
}

namespace detail {

auto
run_spec_to_json(const RunSpec& spec) -> nlohmann::json
{
  return {
      {"run_id", spec.run_id},
      {"model", spec.model},
      {"request_count", spec.request_count},
      {"dispatch", dispatch_to_json(spec.dispatch)},
      {"warmup_count", spec.warmup_count},
      {"repeat_index", spec.repeat_index},
      {"prompt_ids", spec.prompt_ids},
  };
}

auto
run_spec_from_json(const nlohmann::json& doc) -> RunSpec
{
  RunSpec spec;
  spec.run_id = doc.at("run_id").get<std::string>();
  spec.model = doc.at("model").get<std::string>();
  spec.request_count = doc.at("request_count").get<int>();
  spec.dispatch = dispatch_from_json(doc.at("dispatch"));
  spec.warmup_count = doc.at("warmup_count").get<int>();
  spec.repeat_index = doc.at("repeat_index").get<int>();
  spec.prompt_ids = doc.at("prompt_ids").get<std::vector<std::size_t>>();
  return spec;
}

}  // namespace detail

auto
plan_to_json(std::span<const RunSpec> plan) -> std::string
{
  auto doc = nlohmann::json::array();
  for (const auto& spec : plan) {
    doc.push_back(detail::run_spec_to_json(spec));
  }
  return doc.dump();
}

}  // namespace ebench
