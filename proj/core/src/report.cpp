#include "ebench/report.hpp"

#include <unistd.h>

#include <atomic>
#include <chrono>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <limits>
#include <set>
#include <sstream>

#include "ebench/error.hpp"
#include "json_io.hpp"

#ifndef EBENCH_VERSION
#define EBENCH_VERSION "0.0.0"
#endif

namespace ebench {

using nlohmann::json;

auto
tool_version() -> std::string
{
  return EBENCH_VERSION;
}

auto
utc_timestamp_now() -> std::string
{
  const auto now = std::chrono::system_clock::to_time_t(
      std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream out;
  out << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return out.str();
}

auto
derive_metrics(const BenchConfig& config, std::span<const RunResult> runs)
    -> DerivedMetrics
{
  DerivedMetrics d;
  d.series = build_series(runs);
  for (const auto& s : d.series) {
    d.plateaus.push_back(s.points.size() >= 2 ? detect_plateau(s, kPlateauEpsilon)
                                              : PlateauResult{});
  }

  const bool has_gpu = std::any_of(runs.begin(), runs.end(), [](const auto& r) {
    return std::any_of(r.energy.per_source.begin(), r.energy.per_source.end(),
                       [](const auto& kv) { return kv.first.starts_with("gpu"); });
  });
  if (has_gpu) {
    d.gpu_series = build_series(runs, SourceFilter{{"gpu*"}});
  }

  d.fit_load = config.fit_load;
  const auto& fit_source = has_gpu ? d.gpu_series : d.series;
  std::set<double> distinct_params;
  for (const auto& s : fit_source) {
    const auto it = std::find_if(s.points.begin(), s.points.end(),
                                 [&](const auto& p) { return p.load == d.fit_load; });
    if (it == s.points.end()) {
      continue;
    }
    d.models.push_back({s.model, it->mean, it->stddev, it->repeats});
    if (const auto profile = find_model_profile(s.model, config.model_profiles)) {
      const auto params = static_cast<double>(profile->params);
      d.fit_rows.push_back({s.model, params, it->mean});
      distinct_params.insert(params);
    }
  }
  if (distinct_params.size() >= 2) {
    std::vector<ParamPoint> pts;
    for (const auto& row : d.fit_rows) {
      pts.push_back({row.params, row.joules_per_request});
    }
    d.fit = fit_params_vs_energy(pts);
  }

  for (const auto& r : runs) {
    d.total_energy_j += r.energy.total;
    d.failed_requests += r.failures();
    if (r.failures() > 0) {
      d.flagged_runs.push_back(r.spec.run_id);
    }
  }
  d.emissions = estimate_emissions(d.total_energy_j, config.grid);
  return d;
}

auto
rederive(const Report& report) -> Report
{
  Report out = report;
  for (auto& run : out.runs) {
    run.energy = integrate_energy(run.samples, run.window);
    run.emissions = estimate_emissions(run.energy.total, out.config.grid);
  }
  out.derived = derive_metrics(out.config, out.runs);
  return out;
}

namespace {

auto
emissions_to_json(const EmissionsEstimate& e) -> json
{
  return {{"energy_kwh", e.energy_kwh},
          {"carbon_intensity_g_per_kwh", e.carbon_intensity},
          {"pue", e.pue},
          {"grams_co2eq", e.grams_co2eq}};
}

auto
emissions_from_json(const json& j) -> EmissionsEstimate
{
  return {j.at("energy_kwh").get<double>(),
          j.at("carbon_intensity_g_per_kwh").get<double>(),
          j.at("pue").get<double>(), j.at("grams_co2eq").get<double>()};
}

auto
series_to_json(const std::vector<SweepSeries>& all,
               const std::vector<PlateauResult>* plateaus) -> json
{
  json out = json::array();
  for (std::size_t i = 0; i < all.size(); ++i) {
    json points = json::array();
    for (const auto& p : all[i].points) {
      points.push_back({{"load", p.load},
                        {"mean_j", p.mean},
                        {"stddev_j", p.stddev},
                        {"repeats", p.repeats}});
    }
    json s = {{"model", all[i].model}, {"points", std::move(points)}};
    if (plateaus != nullptr) {
      const auto& pl = (*plateaus)[i];
      s["plateau"] = {{"found", pl.found},
                      {"load", pl.plateau_load},
                      {"value_j", pl.plateau_value}};
    }
    out.push_back(std::move(s));
  }
  return out;
}

auto
series_from_json(const json& arr, std::vector<PlateauResult>* plateaus)
    -> std::vector<SweepSeries>
{
  std::vector<SweepSeries> out;
  for (const auto& s : arr) {
    SweepSeries series{s.at("model").get<std::string>(), {}};
    for (const auto& p : s.at("points")) {
      series.points.push_back({p.at("load").get<int>(),
                               p.at("mean_j").get<double>(),
                               p.at("stddev_j").get<double>(),
                               p.at("repeats").get<std::size_t>()});
    }
    if (plateaus != nullptr) {
      const auto& pl = s.at("plateau");
      plateaus->push_back({pl.at("found").get<bool>(), pl.at("load").get<int>(),
                           pl.at("value_j").get<double>()});
    }
    out.push_back(std::move(series));
  }
  return out;
}

auto
run_to_json(const RunResult& r) -> json
{
  json samples = json::array();
  for (const auto& s : r.samples) {
    samples.push_back({s.timestamp.count(), s.source_id, s.watts});
  }
  json records = json::array();
  for (const auto& rec : r.records) {
    records.push_back({{"prompt_id", rec.prompt_id},
                       {"send_s", rec.send_time.count()},
                       {"completion_s", rec.completion_time.count()},
                       {"output_tokens", rec.output_token_count},
                       {"status", to_string(rec.status)}});
  }
  json per_source = json::object();
  for (const auto& [id, j] : r.energy.per_source) {
    per_source[id] = j;
  }
  return {
      {"spec", detail::run_spec_to_json(r.spec)},
      {"warmup",
       {{"sent", r.warmup.sent},
        {"failures", r.warmup.failures},
        {"start_s", r.warmup.start.count()},
        {"end_s", r.warmup.end.count()}}},
      {"window", {{"start_s", r.window.start.count()}, {"end_s", r.window.end.count()}}},
      {"energy", {{"per_source_j", std::move(per_source)}, {"total_j", r.energy.total}}},
      {"emissions", emissions_to_json(r.emissions)},
      {"failures", r.failures()},
      {"records", std::move(records)},
      {"samples", std::move(samples)},
  };
}

auto
run_from_json(const json& j) -> RunResult
{
  RunResult r;
  r.spec = detail::run_spec_from_json(j.at("spec"));
  const auto& w = j.at("warmup");
  r.warmup = {w.at("sent").get<int>(), w.at("failures").get<int>(),
              Seconds(w.at("start_s").get<double>()),
              Seconds(w.at("end_s").get<double>())};
  r.window = {Seconds(j.at("window").at("start_s").get<double>()),
              Seconds(j.at("window").at("end_s").get<double>())};
  for (const auto& [id, v] : j.at("energy").at("per_source_j").items()) {
    r.energy.per_source[id] = v.get<double>();
  }
  r.energy.total = j.at("energy").at("total_j").get<double>();
  r.emissions = emissions_from_json(j.at("emissions"));
  for (const auto& rec : j.at("records")) {
    r.records.push_back({rec.at("prompt_id").get<std::size_t>(),
                         Seconds(rec.at("send_s").get<double>()),
                         Seconds(rec.at("completion_s").get<double>()),
                         rec.at("output_tokens").get<int>(),
                         parse_request_status(rec.at("status").get<std::string>())});
  }
  for (const auto& s : j.at("samples")) {
    r.samples.push_back({s.at(1).get<std::string>(), Seconds(s.at(0).get<double>()),
                         s.at(2).get<double>()});
  }
  return r;
}

auto
derived_to_json(const DerivedMetrics& d) -> json
{
  json fit_rows = json::array();
  for (const auto& row : d.fit_rows) {
    fit_rows.push_back({{"model", row.model},
                        {"params", row.params},
                        {"j_per_request", row.joules_per_request}});
  }
  json models = json::array();
  for (const auto& m : d.models) {
    models.push_back({{"model", m.model},
                      {"mean_j", m.mean},
                      {"stddev_j", m.stddev},
                      {"repeats", m.repeats}});
  }
  json fit = nullptr;
  if (d.fit) {
    fit = {{"slope", d.fit->slope},
           {"intercept", d.fit->intercept},
           {"r_squared", d.fit->r_squared}};
  }
  return {
      {"series", series_to_json(d.series, &d.plateaus)},
      {"gpu_series", series_to_json(d.gpu_series, nullptr)},
      {"fit_load", d.fit_load},
      {"fit_rows", std::move(fit_rows)},
      {"fit", std::move(fit)},
      {"models", std::move(models)},
      {"total_energy_j", d.total_energy_j},
      {"emissions", emissions_to_json(d.emissions)},
      {"failed_requests", d.failed_requests},
      {"flagged_runs", d.flagged_runs},
  };
}

auto
derived_from_json(const json& j) -> DerivedMetrics
{
  DerivedMetrics d;
  d.series = series_from_json(j.at("series"), &d.plateaus);
  d.gpu_series = series_from_json(j.at("gpu_series"), nullptr);
  d.fit_load = j.at("fit_load").get<int>();
  for (const auto& row : j.at("fit_rows")) {
    d.fit_rows.push_back({row.at("model").get<std::string>(),
                          row.at("params").get<double>(),
                          row.at("j_per_request").get<double>()});
  }
  if (!j.at("fit").is_null()) {
    const auto& f = j.at("fit");
    d.fit = LinearFit{f.at("slope").get<double>(), f.at("intercept").get<double>(),
                      f.at("r_squared").get<double>()};
  }
  for (const auto& m : j.at("models")) {
    d.models.push_back({m.at("model").get<std::string>(),
                        m.at("mean_j").get<double>(),
                        m.at("stddev_j").get<double>(),
                        m.at("repeats").get<std::size_t>()});
  }
  d.total_energy_j = j.at("total_energy_j").get<double>();
  d.emissions = emissions_from_json(j.at("emissions"));
  d.failed_requests = j.at("failed_requests").get<std::size_t>();
  d.flagged_runs = j.at("flagged_runs").get<std::vector<std::string>>();
  return d;
}

}  // namespace

auto
report_to_json(const Report& report) -> std::string
{
  json runs = json::array();
  for (const auto& r : report.runs) {
    runs.push_back(run_to_json(r));
  }
  json doc = {
      {"schema", report.schema},
      {"tool_version", report.tool_version},
      {"started_utc", report.started_utc},
      {"finished_utc", report.finished_utc},
      {"config", detail::config_to_json_value(report.config)},
      {"runs", std::move(runs)},
      {"derived", derived_to_json(report.derived)},
  };
  return doc.dump(1);
}

auto
parse_report(std::string_view json_text) -> Report
{
  const auto doc = json::parse(json_text, nullptr, false);
  if (doc.is_discarded() || !doc.is_object()) {
    throw Error(ErrorCode::SchemaMismatch, "report is not a JSON object");
  }
  const auto schema = doc.value("schema", std::string());
  if (schema != kReportSchema) {
    throw Error(ErrorCode::SchemaMismatch,
                "expected schema '" + std::string(kReportSchema) + "', got '" +
                    schema + "'");
  }
  Report report;
  try {
    report.schema = schema;
    report.tool_version = doc.at("tool_version").get<std::string>();
    report.started_utc = doc.at("started_utc").get<std::string>();
    report.finished_utc = doc.at("finished_utc").get<std::string>();
    report.config = detail::config_from_json_value(doc.at("config"));
    for (const auto& r : doc.at("runs")) {
      report.runs.push_back(run_from_json(r));
    }
    report.derived = derived_from_json(doc.at("derived"));
  }
  catch (const json::exception& e) {
    throw Error(ErrorCode::SchemaMismatch, e.what());
  }
  return report;
}

auto
load_report(const std::filesystem::path& path) -> Report
{
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorCode::FileNotFound, "report " + path.string());
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_report(buf.str());
}

void
write_file_atomic(const std::filesystem::path& path,
                  const std::function<void(std::ostream&)>& writer)
{
  static std::atomic<unsigned> counter{0};
  auto tmp = path;
  tmp += ".tmp." + std::to_string(::getpid()) + "." +
         std::to_string(counter.fetch_add(1));
  try {
    {
      std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
      if (!out) {
        throw Error(ErrorCode::Io, "cannot open " + tmp.string());
      }
      writer(out);
      out.flush();
      if (!out) {
        throw Error(ErrorCode::Io, "write to " + tmp.string() + " failed");
      }
    }
    std::filesystem::rename(tmp, path);
  }
  catch (...) {
    std::error_code ec;
    std::filesystem::remove(tmp, ec);
    throw;
  }
}

void
write_report(const std::filesystem::path& path, const Report& report)
{
  const auto text = report_to_json(report);
  write_file_atomic(path, [&](std::ostream& out) { out << text << '\n'; });
}

void
write_series_csv(std::ostream& out, const DerivedMetrics& d)
{
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  out << "model,load,j_per_request,stddev_j,repeats,plateau\n";
  for (std::size_t i = 0; i < d.series.size(); ++i) {
    const auto& s = d.series[i];
    const auto& pl = d.plateaus[i];
    for (const auto& p : s.points) {
      out << s.model << ',' << p.load << ',' << p.mean << ',' << p.stddev << ','
          << p.repeats << ',' << (pl.found && pl.plateau_load == p.load ? 1 : 0)
          << '\n';
    }
  }
}

void
write_params_csv(std::ostream& out, const DerivedMetrics& d)
{
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  out << "model,params,j_per_request\n";
  for (const auto& row : d.fit_rows) {
    out << row.model << ',' << row.params << ',' << row.joules_per_request << '\n';
  }
}

void
write_models_csv(std::ostream& out, const DerivedMetrics& d)
{
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  out << "model,mean_j,stddev_j,repeats\n";
  for (const auto& m : d.models) {
    out << m.model << ',' << m.mean << ',' << m.stddev << ',' << m.repeats << '\n';
  }
}

auto
write_plot_data(const Report& report, const std::filesystem::path& dir)
    -> std::vector<std::filesystem::path>
{
  std::filesystem::create_directories(dir);
  std::vector<std::filesystem::path> written;
  auto emit = [&](const char* name, const std::function<void(std::ostream&)>& fn) {
    const auto path = dir / name;
    write_file_atomic(path, fn);
    written.push_back(path);
  };
  emit("series.csv", [&](std::ostream& o) { write_series_csv(o, report.derived); });
  emit("params.csv", [&](std::ostream& o) { write_params_csv(o, report.derived); });
  emit("models.csv", [&](std::ostream& o) { write_models_csv(o, report.derived); });
  emit("samples.csv", [&](std::ostream& o) {
    o << std::setprecision(std::numeric_limits<double>::max_digits10);
    o << "run_id,timestamp_s,source_id,watts\n";
    for (const auto& r : report.runs) {
      for (const auto& s : r.samples) {
        o << r.spec.run_id << ',' << s.timestamp.count() << ',' << s.source_id
          << ',' << s.watts << '\n';
      }
    }
  });
  return written;
}

void
write_summary(std::ostream& out, const Report& report)
{
  const auto& d = report.derived;
  out << "ebench report (" << report.schema << ", tool " << report.tool_version
      << ")\n";
  out << "runs: " << report.runs.size() << "  failed requests: "
      << d.failed_requests << "  total energy: " << std::fixed
      << std::setprecision(3) << d.total_energy_j << " J  emissions: "
      << std::setprecision(6) << d.emissions.grams_co2eq << " g CO2eq\n";
  for (std::size_t i = 0; i < d.series.size(); ++i) {
    const auto& s = d.series[i];
    const auto& pl = d.plateaus[i];
    out << "\n" << s.model << "\n";
    out << std::setw(8) << "load" << std::setw(16) << "J/request"
        << std::setw(14) << "stddev" << std::setw(9) << "repeats" << "\n";
    for (const auto& p : s.points) {
      out << std::setw(8) << p.load << std::setw(16) << std::setprecision(4)
          << p.mean << std::setw(14) << p.stddev << std::setw(9) << p.repeats
          << (pl.found && pl.plateau_load == p.load ? "  <- plateau" : "")
          << "\n";
    }
    if (!pl.found) {
      out << "  no plateau within " << kPlateauEpsilon * 100 << "%\n";
    }
  }
  if (d.fit) {
    out << "\nparams vs J/request at load " << d.fit_load << ": slope "
        << std::scientific << std::setprecision(4) << d.fit->slope
        << " J/param, intercept " << std::fixed << d.fit->intercept
        << " J, r^2 " << d.fit->r_squared << "\n";
  }
  if (!d.flagged_runs.empty()) {
    out << "\nruns with failures:";
    for (const auto& id : d.flagged_runs) {
      out << ' ' << id;
    }
    out << "\n";
  }
  out.unsetf(std::ios::floatfield);
}

}  // namespace ebench
