#include "ebench/hw_sources.hpp"

#include <array>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <memory>

#include "ebench/error.hpp"

namespace ebench {

auto
rapl_delta_uj(std::uint64_t previous, std::uint64_t current,
              std::uint64_t max_range_uj) -> std::uint64_t
{
  if (current >= previous) {
    return current - previous;
  }
  return max_range_uj - previous + current;
}

RaplSource::RaplSource(std::filesystem::path zone) : zone_(std::move(zone))
{
  id_ = "cpu-" + zone_.filename().string();
}

auto
RaplSource::read_counter(const char* file) const -> std::uint64_t
{
  std::ifstream in(zone_ / file);
  std::uint64_t value = 0;
  if (!(in >> value)) {
    throw Error(ErrorCode::SourceInitFailure,
                "cannot read " + (zone_ / file).string());
  }
  return value;
}

void
RaplSource::init()
{
  max_range_uj_ = read_counter("max_energy_range_uj");
  last_uj_ = read_counter("energy_uj");
  last_time_ = mono_now();
  last_watts_ = 0.0;
}

auto
RaplSource::read_watts() -> double
{
  const auto now = mono_now();
  const auto uj = read_counter("energy_uj");
  const double dt = (now - last_time_).count();
  if (dt <= 0.0) {
    return last_watts_;
  }
  last_watts_ = static_cast<double>(rapl_delta_uj(last_uj_, uj, max_range_uj_)) *
                1e-6 / dt;
  last_uj_ = uj;
  last_time_ = now;
  return last_watts_;
}

auto
parse_nvidia_smi_power(std::string_view line) -> std::optional<double>
{
  while (!line.empty() && (line.front() == ' ' || line.front() == '\t')) {
    line.remove_prefix(1);
  }
  while (!line.empty() &&
         (line.back() == ' ' || line.back() == '\n' || line.back() == '\r')) {
    line.remove_suffix(1);
  }
  double value = 0.0;
  const auto [ptr, ec] =
      std::from_chars(line.data(), line.data() + line.size(), value);
  if (ec != std::errc() || ptr != line.data() + line.size() || value < 0.0) {
    return std::nullopt;
  }
  return value;
}

NvidiaSmiSource::NvidiaSmiSource(int gpu_index) : gpu_index_(gpu_index) {}

auto
NvidiaSmiSource::id() const -> std::string
{
  return "gpu" + std::to_string(gpu_index_);
}

void
NvidiaSmiSource::init()
{
  (void)read_watts();
}

auto
NvidiaSmiSource::read_watts() -> double
{
  const auto cmd = "nvidia-smi --query-gpu=power.draw --format=csv,noheader,nounits -i " +
                   std::to_string(gpu_index_) + " 2>/dev/null";
  std::unique_ptr<FILE, int (*)(FILE*)> pipe(::popen(cmd.c_str(), "r"),
                                             ::pclose);
  if (!pipe) {
    throw Error(ErrorCode::SourceInitFailure, "cannot run nvidia-smi");
  }
  std::array<char, 128> buf{};
  if (std::fgets(buf.data(), static_cast<int>(buf.size()), pipe.get()) ==
      nullptr) {
    throw Error(ErrorCode::SourceInitFailure, "no output from nvidia-smi");
  }
  const auto watts = parse_nvidia_smi_power(buf.data());
  if (!watts) {
    throw Error(ErrorCode::SourceInitFailure,
                "unparseable nvidia-smi power '" + std::string(buf.data()) + "'");
  }
  return *watts;
}

}  // namespace ebench
