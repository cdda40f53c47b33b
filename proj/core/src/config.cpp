#include "ebench/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "json_io.hpp"

namespace ebench {

using nlohmann::json;

auto
builtin_model_profiles() -> const std::vector<ModelProfile>&
{
  static const std::vector<ModelProfile> profiles = {
      {"EleutherAI/pythia-70m", 70'000'000ULL, 6},
      {"EleutherAI/pythia-160m", 160'000'000ULL, 12},
      {"EleutherAI/pythia-410m", 410'000'000ULL, 24},
      {"EleutherAI/pythia-1b", 1'000'000'000ULL, 16},
      {"EleutherAI/pythia-1.4b", 1'400'000'000ULL, 24},
      {"EleutherAI/pythia-2.8b", 2'800'000'000ULL, 32},
      {"EleutherAI/pythia-6.9b", 6'900'000'000ULL, 32},
      {"databricks/dolly-v2-3b", 2'800'000'000ULL, 32},
      {"bigscience/bloom-3b", 3'000'000'000ULL, 30},
      {"togethercomputer/RedPajama-INCITE-Base-3B-v1", 2'800'000'000ULL, 32},
  };
  return profiles;
}

namespace {

auto
basename_of(std::string_view name) -> std::string_view
{
  const auto slash = name.rfind('/');
  return slash == std::string_view::npos ? name : name.substr(slash + 1);
}

auto
describe(const std::vector<ConfigViolation>& violations) -> std::string
{
  std::string out;
  for (const auto& v : violations) {
    if (!out.empty()) {
      out += "; ";
    }
    out += std::string(to_string(v.code)) + ": " + v.message;
  }
  return out;
}

void
reject_unknown_keys(const json& obj, std::initializer_list<std::string_view> keys,
                    std::string_view where)
{
  if (!obj.is_object()) {
    throw Error(ErrorCode::InvalidConfig,
                std::string(where) + " must be an object");
  }
  for (const auto& [key, _] : obj.items()) {
    if (std::find(keys.begin(), keys.end(), key) == keys.end()) {
      throw Error(ErrorCode::InvalidConfig,
                  "unknown key '" + key + "' in " + std::string(where));
    }
  }
}

template <typename T>
void
read_opt(const json& obj, const char* key, T& out)
{
  if (obj.contains(key) && !obj[key].is_null()) {
    out = obj[key].get<T>();
  }
}

}  // namespace

auto
find_model_profile(std::string_view model, const std::vector<ModelProfile>& extra)
    -> std::optional<ModelProfile>
{
  for (const auto* table : {&extra, &builtin_model_profiles()}) {
    for (const auto& p : *table) {
      if (p.name == model) {
        return p;
      }
    }
    for (const auto& p : *table) {
      if (basename_of(p.name) == basename_of(model)) {
        return p;
      }
    }
  }
  return std::nullopt;
}

ConfigError::ConfigError(std::vector<ConfigViolation> violations)
    : Error(violations.empty() ? ErrorCode::InvalidConfig
                               : violations.front().code,
            describe(violations)),
      violations_(std::move(violations))
{
}

auto
config_violations(const BenchConfig& config) -> std::vector<ConfigViolation>
{
  std::vector<ConfigViolation> out;
  auto add = [&](ErrorCode code, std::string message) {
    out.push_back({code, std::move(message)});
  };

  if (config.endpoint_url.empty()) {
    add(ErrorCode::EmptyEndpoint, "endpoint_url is empty");
  }
  if (config.models.empty()) {
    add(ErrorCode::EmptyModels, "no models configured");
  }
  std::set<std::string> seen_models;
  for (const auto& m : config.models) {
    if (!seen_models.insert(m).second) {
      add(ErrorCode::DuplicateModel, "model '" + m + "' listed twice");
    }
  }
  if (config.request_loads.empty()) {
    add(ErrorCode::EmptyLoads, "no request loads configured");
  }
  std::set<int> seen_loads;
  for (int load : config.request_loads) {
    if (load <= 0) {
      add(ErrorCode::NonPositiveLoad,
          "request load " + std::to_string(load) + " is not positive");
    }
    else if (!seen_loads.insert(load).second) {
      add(ErrorCode::DuplicateLoad,
          "request load " + std::to_string(load) + " listed twice");
    }
  }
  if (config.warmup_count < 0) {
    add(ErrorCode::InvalidConfig, "warmup_count must be >= 0");
  }
  if (config.repeats < 1) {
    add(ErrorCode::NonPositiveRepeats, "repeats must be >= 1");
  }
  std::error_code ec;
  if (config.dataset_path.empty() ||
      !std::filesystem::is_regular_file(config.dataset_path, ec)) {
    add(ErrorCode::MissingDataset,
        "dataset '" + config.dataset_path.string() + "' does not exist");
  }
  if (config.max_prompts && *config.max_prompts <= 0) {
    add(ErrorCode::NonPositiveMaxPrompts, "max_prompts must be positive");
  }
  if (config.dispatch.mode == DispatchMode::FixedRate) {
    if (!config.dispatch.rate || !(*config.dispatch.rate > 0.0) ||
        !std::isfinite(*config.dispatch.rate)) {
      add(ErrorCode::NonPositiveRate,
          "fixed-rate dispatch needs a finite rate > 0");
    }
  }
  else if (config.dispatch.rate) {
    add(ErrorCode::RateWithBurst, "burst dispatch carries no rate");
  }
  if (!(config.sample_interval.count() > 0.0)) {
    add(ErrorCode::NonPositiveInterval, "sample_interval must be > 0");
  }
  if (config.max_output_tokens < 1) {
    add(ErrorCode::NonPositiveMaxTokens, "max_output_tokens must be >= 1");
  }
  if (!(config.request_timeout.count() > 0.0)) {
    add(ErrorCode::InvalidConfig, "request timeout must be > 0");
  }
  if (!is_valid(config.grid)) {
    add(ErrorCode::InvalidGrid, "carbon intensity must be >= 0 and PUE >= 1");
  }
  for (const auto& p : config.model_profiles) {
    if (p.name.empty() || p.params == 0 || p.layers == 0) {
      add(ErrorCode::InvalidConfig,
          "model profile '" + p.name + "' needs params > 0 and layers > 0");
    }
  }
  if (config.fit_load <= 0) {
    add(ErrorCode::NonPositiveLoad, "fit_load must be positive");
  }
  return out;
}

auto
validate_config(BenchConfig config) -> BenchConfig
{
  auto violations = config_violations(config);
  if (!violations.empty()) {
    throw ConfigError(std::move(violations));
  }
  return config;
}

namespace detail {

auto
dispatch_to_json(const DispatchPolicy& policy) -> json
{
  json out;
  out["mode"] = policy.mode == DispatchMode::Burst ? "burst" : "fixed_rate";
  if (policy.rate) {
    out["rate"] = *policy.rate;
  }
  return out;
}

auto
dispatch_from_json(const json& doc) -> DispatchPolicy
{
  reject_unknown_keys(doc, {"mode", "rate"}, "dispatch");
  DispatchPolicy policy;
  const auto mode = doc.value("mode", std::string("burst"));
  if (mode == "burst") {
    policy.mode = DispatchMode::Burst;
  }
  else if (mode == "fixed_rate") {
    policy.mode = DispatchMode::FixedRate;
  }
  else {
    throw Error(ErrorCode::InvalidConfig, "unknown dispatch mode '" + mode + "'");
  }
  if (doc.contains("rate") && !doc["rate"].is_null()) {
    policy.rate = doc["rate"].get<double>();
  }
  return policy;
}

auto
config_to_json_value(const BenchConfig& c) -> json
{
  json doc;
  doc["endpoint"] = c.endpoint_url;
  doc["models"] = c.models;
  doc["request_loads"] = c.request_loads;
  doc["warmup_count"] = c.warmup_count;
  doc["repeats"] = c.repeats;
  doc["dataset"] = {
      {"path", c.dataset_path.string()},
      {"format", std::string(to_string(c.dataset_format))},
      {"max_prompts", c.max_prompts ? json(*c.max_prompts) : json(nullptr)},
  };
  doc["dispatch"] = dispatch_to_json(c.dispatch);
  doc["sample_interval_s"] = c.sample_interval.count();
  doc["request"] = {
      {"max_tokens", c.max_output_tokens},
      {"temperature", c.temperature},
      {"timeout_s", c.request_timeout.count()},
  };
  doc["grid"] = {
      {"carbon_intensity_g_per_kwh", c.grid.carbon_intensity},
      {"pue", c.grid.pue},
  };
  doc["power_sources"] = c.power_sources;
  json profiles = json::array();
  for (const auto& p : c.model_profiles) {
    profiles.push_back(
        {{"name", p.name}, {"params", p.params}, {"layers", p.layers}});
  }
  doc["model_profiles"] = std::move(profiles);
  doc["fit_load"] = c.fit_load;
  return doc;
}

auto
config_from_json_value(const json& doc) -> BenchConfig
{
  reject_unknown_keys(doc,
                      {"endpoint", "models", "request_loads", "warmup_count",
                       "repeats", "dataset", "dispatch", "sample_interval_s",
                       "request", "grid", "power_sources", "model_profiles",
                       "fit_load"},
                      "config");
  BenchConfig c;
  try {
    read_opt(doc, "endpoint", c.endpoint_url);
    read_opt(doc, "models", c.models);
    read_opt(doc, "request_loads", c.request_loads);
    read_opt(doc, "warmup_count", c.warmup_count);
    read_opt(doc, "repeats", c.repeats);
    if (doc.contains("dataset")) {
      const auto& ds = doc["dataset"];
      reject_unknown_keys(ds, {"path", "format", "max_prompts"}, "dataset");
      if (ds.contains("path")) {
        c.dataset_path = ds["path"].get<std::string>();
      }
      if (ds.contains("format")) {
        c.dataset_format = parse_prompt_format(ds["format"].get<std::string>());
      }
      if (ds.contains("max_prompts") && !ds["max_prompts"].is_null()) {
        c.max_prompts = ds["max_prompts"].get<int>();
      }
    }
    if (doc.contains("dispatch")) {
      c.dispatch = dispatch_from_json(doc["dispatch"]);
    }
    if (doc.contains("sample_interval_s")) {
      c.sample_interval = Seconds(doc["sample_interval_s"].get<double>());
    }
    if (doc.contains("request")) {
      const auto& rq = doc["request"];
      reject_unknown_keys(rq, {"max_tokens", "temperature", "timeout_s"},
                          "request");
      read_opt(rq, "max_tokens", c.max_output_tokens);
      read_opt(rq, "temperature", c.temperature);
      if (rq.contains("timeout_s")) {
        c.request_timeout = Seconds(rq["timeout_s"].get<double>());
      }
    }
    if (doc.contains("grid")) {
      const auto& g = doc["grid"];
      reject_unknown_keys(g, {"carbon_intensity_g_per_kwh", "pue"}, "grid");
      read_opt(g, "carbon_intensity_g_per_kwh", c.grid.carbon_intensity);
      read_opt(g, "pue", c.grid.pue);
    }
    read_opt(doc, "power_sources", c.power_sources);
    if (doc.contains("model_profiles")) {
      for (const auto& p : doc["model_profiles"]) {
        reject_unknown_keys(p, {"name", "params", "layers"}, "model_profiles");
        c.model_profiles.push_back({p.at("name").get<std::string>(),
                                    p.at("params").get<std::uint64_t>(),
                                    p.at("layers").get<std::uint32_t>()});
      }
    }
    read_opt(doc, "fit_load", c.fit_load);
  }
  catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidConfig, e.what());
  }
  return c;
}

}  // namespace detail

auto
parse_config(std::string_view json_text) -> BenchConfig
{
  json doc;
  try {
    doc = json::parse(json_text);
  }
  catch (const json::parse_error& e) {
    throw Error(ErrorCode::InvalidConfig, e.what());
  }
  return detail::config_from_json_value(doc);
}

auto
load_config_file(const std::filesystem::path& path) -> BenchConfig
{
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorCode::FileNotFound, "config " + path.string());
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  auto config = parse_config(buf.str());
  // Relative dataset paths resolve against the config file's directory.
  if (!config.dataset_path.empty() && config.dataset_path.is_relative()) {
    config.dataset_path = path.parent_path() / config.dataset_path;
  }
  return config;
}

auto
config_to_json(const BenchConfig& config) -> std::string
{
  return detail::config_to_json_value(config).dump(2);
}

}  // namespace ebench
