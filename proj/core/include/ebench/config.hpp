#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ebench/clock.hpp"
#include "ebench/dataset.hpp"
#include "ebench/emissions.hpp"
#include "ebench/error.hpp"

namespace ebench {

enum class DispatchMode { Burst, FixedRate };

/// Burst sends every request of a run with no pacing. FixedRate spaces
/// submissions 1/rate seconds apart (uniform arrivals).
struct DispatchPolicy {
  DispatchMode mode = DispatchMode::Burst;
  std::optional<double> rate;  // requests per second, FixedRate only

  static auto burst() -> DispatchPolicy { return {}; }
  static auto fixed_rate(double r) -> DispatchPolicy
  {
    return {DispatchMode::FixedRate, r};
  }

  friend auto operator==(const DispatchPolicy&, const DispatchPolicy&)
      -> bool = default;
};

struct ModelProfile {
  std::string name;
  std::uint64_t params = 0;
  std::uint32_t layers = 0;

  friend auto operator==(const ModelProfile&, const ModelProfile&)
      -> bool = default;
};

/// Parameter/layer counts for the Pythia scaling suite and the ~3B
/// cross-architecture set.
auto builtin_model_profiles() -> const std::vector<ModelProfile>&;

/// Finds a profile by exact name or by the part after the last '/'
/// (so "EleutherAI/pythia-70m" and "pythia-70m" both match).
auto find_model_profile(std::string_view model,
                        const std::vector<ModelProfile>& extra = {})
    -> std::optional<ModelProfile>;

struct BenchConfig {
  std::string endpoint_url = "http://127.0.0.1:8000";
  std::vector<std::string> models;
  std::vector<int> request_loads;
  int warmup_count = 200;
  int repeats = 1;
  std::filesystem::path dataset_path;
  PromptFormat dataset_format = PromptFormat::HellaSwagJsonl;
  std::optional<int> max_prompts;
  DispatchPolicy dispatch;
  Seconds sample_interval{15.0};
  int max_output_tokens = 128;
  double temperature = 0.0;
  Seconds request_timeout{300.0};
  GridProfile grid;
  // Power source specs, see make_power_source().
  std::vector<std::string> power_sources;
  std::vector<ModelProfile> model_profiles;
  // Load whose per-request energy feeds the params-vs-energy fit.
  int fit_load = 100;

  friend auto operator==(const BenchConfig&, const BenchConfig&)
      -> bool = default;
};

struct ConfigViolation {
  ErrorCode code;
  std::string message;
};

class ConfigError : public Error {
 public:
  explicit ConfigError(std::vector<ConfigViolation> violations);
  [[nodiscard]] auto violations() const -> const std::vector<ConfigViolation>&
  {
    return violations_;
  }

 private:
  std::vector<ConfigViolation> violations_;
};

/// Every invariant violation in `config`, in field order. Empty when valid.
auto config_violations(const BenchConfig& config)
    -> std::vector<ConfigViolation>;

/// Returns `config` unchanged when valid, otherwise throws ConfigError
/// listing all violations.
auto validate_config(BenchConfig config) -> BenchConfig;

/// Parses the JSON config document. Missing keys keep their defaults;
/// unknown keys are rejected with InvalidConfig. No validation is done here.
auto parse_config(std::string_view json_text) -> BenchConfig;
auto load_config_file(const std::filesystem::path& path) -> BenchConfig;
auto config_to_json(const BenchConfig& config) -> std::string;

}  // namespace ebench
