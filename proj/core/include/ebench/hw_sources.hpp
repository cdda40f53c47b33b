#pragma once

// Real sensor backends. Compiled only with EBENCH_HARDWARE_SOURCES; none of
// them is exercised against hardware by the test suite.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include "ebench/energy.hpp"

namespace ebench {

/// Linux powercap (RAPL) zone. Power is the energy counter delta divided by
/// elapsed time since the previous read, with counter wraparound handled.
class RaplSource final : public PowerSource {
 public:
  explicit RaplSource(
      std::filesystem::path zone = "/sys/class/powercap/intel-rapl:0");
  [[nodiscard]] auto id() const -> std::string override { return id_; }
  void init() override;
  auto read_watts() -> double override;

 private:
  auto read_counter(const char* file) const -> std::uint64_t;

  std::filesystem::path zone_;
  std::string id_;
  std::uint64_t max_range_uj_ = 0;
  std::uint64_t last_uj_ = 0;
  Seconds last_time_{};
  double last_watts_ = 0.0;
};

/// Counter delta in microjoules, accounting for one wrap at `max_range_uj`.
auto rapl_delta_uj(std::uint64_t previous, std::uint64_t current,
                   std::uint64_t max_range_uj) -> std::uint64_t;

/// GPU board power via `nvidia-smi --query-gpu=power.draw`.
class NvidiaSmiSource final : public PowerSource {
 public:
  explicit NvidiaSmiSource(int gpu_index = 0);
  [[nodiscard]] auto id() const -> std::string override;
  void init() override;
  auto read_watts() -> double override;

 private:
  int gpu_index_;
};

/// Parses one line of `nvidia-smi --format=csv,noheader,nounits` power
/// output ("123.45" or "[N/A]").
auto parse_nvidia_smi_power(std::string_view line) -> std::optional<double>;

}  // namespace ebench
