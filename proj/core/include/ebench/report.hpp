#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ebench/analysis.hpp"
#include "ebench/config.hpp"

namespace ebench {

inline constexpr std::string_view kReportSchema = "ebench.report/1";
inline constexpr double kPlateauEpsilon = 0.05;

struct FitRow {
  std::string model;
  double params = 0.0;
  double joules_per_request = 0.0;

  friend auto operator==(const FitRow&, const FitRow&) -> bool = default;
};

struct ModelSummary {
  std::string model;
  double mean = 0.0;
  double stddev = 0.0;
  std::size_t repeats = 0;

  friend auto operator==(const ModelSummary&, const ModelSummary&)
      -> bool = default;
};

/// Everything computed from the raw runs. `gpu_series` restricts energy to
/// "gpu*" sources and is empty when no such source was sampled.
struct DerivedMetrics {
  std::vector<SweepSeries> series;
  std::vector<PlateauResult> plateaus;  // parallel to series
  std::vector<SweepSeries> gpu_series;
  int fit_load = 0;
  std::vector<FitRow> fit_rows;       // params vs J/request at fit_load
  std::optional<LinearFit> fit;       // needs >= 2 distinct param counts
  std::vector<ModelSummary> models;   // per-model mean/stddev at fit_load
  double total_energy_j = 0.0;
  EmissionsEstimate emissions;
  std::size_t failed_requests = 0;
  std::vector<std::string> flagged_runs;  // run ids with any failure

  friend auto operator==(const DerivedMetrics&, const DerivedMetrics&)
      -> bool = default;
};

struct Report {
  std::string schema{kReportSchema};
  std::string tool_version;
  std::string started_utc;
  std::string finished_utc;
  BenchConfig config;
  std::vector<RunResult> runs;
  DerivedMetrics derived;
};

auto tool_version() -> std::string;
auto utc_timestamp_now() -> std::string;

auto derive_metrics(const BenchConfig& config, std::span<const RunResult> runs)
    -> DerivedMetrics;

/// Re-integrates every run from its stored samples and recomputes the
/// derived metrics, exactly as the pipeline did.
auto rederive(const Report& report) -> Report;

auto report_to_json(const Report& report) -> std::string;
/// Throws SchemaMismatch for another schema version or a malformed document.
auto parse_report(std::string_view json_text) -> Report;
auto load_report(const std::filesystem::path& path) -> Report;

/// Streams content into a sibling temp file and renames it over `path`. If
/// `writer` throws, the temp file is removed and `path` is left untouched.
void write_file_atomic(const std::filesystem::path& path,
                       const std::function<void(std::ostream&)>& writer);
void write_report(const std::filesystem::path& path, const Report& report);

/// Plot-data exports:
///   series.csv   model,load,j_per_request,stddev_j,repeats,plateau
///   params.csv   model,params,j_per_request
///   models.csv   model,mean_j,stddev_j,repeats
///   samples.csv  run_id,timestamp_s,source_id,watts
/// Returns the paths written.
auto write_plot_data(const Report& report, const std::filesystem::path& dir)
    -> std::vector<std::filesystem::path>;

void write_series_csv(std::ostream& out, const DerivedMetrics& derived);
void write_params_csv(std::ostream& out, const DerivedMetrics& derived);
void write_models_csv(std::ostream& out, const DerivedMetrics& derived);

/// Human-readable summary table.
void write_summary(std::ostream& out, const Report& report);

}  // namespace ebench
