#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <fstream>

#include "ebench/mockserv.hpp"
#include "ebench/report.hpp"
#include "test_util.hpp"

namespace ebench {
namespace {

auto
run_cli(const std::string& args, const std::filesystem::path& log) -> int
{
  const std::string cmd =
      std::string(EBENCH_CLI_PATH) + " " + args + " >" + log.string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

auto
slurp(const std::filesystem::path& p) -> std::string
{
  std::ifstream in(p);
  return {std::istreambuf_iterator<char>(in), {}};
}

auto
fast_mock(int fault_every = 0) -> MockConfig
{
  MockConfig cfg;
  cfg.capacity = 10;
  cfg.per_request_duration = Seconds(0.05);
  cfg.faults.every = fault_every;
  return cfg;
}

TEST(Cli, UnreachableEndpointExitsTwoWithoutReport)
{
  testing::TempDir tmp;
  int port = 0;
  {
    MockServer probe(fast_mock());
    port = probe.port();
  }
  const auto data = tmp.write("hs.jsonl", testing::hellaswag_lines(10));
  const auto out = tmp.path() / "report.json";
  const int rc = run_cli("run -q --endpoint http://127.0.0.1:" + std::to_string(port) +
                             " --models pythia-70m --loads 5 --warmup 2 --dataset " +
                             data.string() + " --power-source constant:50 --timeout 2 --out " +
                             out.string(),
                         tmp.path() / "log.txt");
  EXPECT_EQ(rc, 2) << slurp(tmp.path() / "log.txt");
  EXPECT_FALSE(std::filesystem::exists(out));
}

TEST(Cli, ConfigErrorExitsOne)
{
  testing::TempDir tmp;
  const int rc = run_cli("run -q --models pythia-70m --loads 0 --dataset /nonexistent",
                         tmp.path() / "log.txt");
  EXPECT_EQ(rc, 1) << slurp(tmp.path() / "log.txt");

  const auto cfg = tmp.write("c.json", R"({"models": ["m"], "request_loads": [5], "bogus": 1})");
  EXPECT_EQ(run_cli("run -q --config " + cfg.string(), tmp.path() / "log2.txt"), 1);
}

TEST(Cli, MockEndToEndThenVerify)
{
  testing::TempDir tmp;
  MockServer server(fast_mock());
  const auto data = tmp.write("hs.jsonl", testing::hellaswag_lines(40));
  const auto cfg = tmp.write("bench.json", R"({
    "endpoint": ")" + server.base_url() + R"(",
    "models": ["pythia-70m", "pythia-160m"],
    "request_loads": [5, 20],
    "warmup_count": 4,
    "repeats": 2,
    "dataset": {"path": "hs.jsonl"},
    "sample_interval_s": 0.005,
    "power_sources": ["mock-http", "constant:gpu0:50"],
    "fit_load": 20
  })");
  const auto out = tmp.path() / "report.json";
  const int rc = run_cli("run -q --config " + cfg.string() + " --out " + out.string() +
                             " --plot-dir " + (tmp.path() / "plots").string(),
                         tmp.path() / "log.txt");
  ASSERT_EQ(rc, 0) << slurp(tmp.path() / "log.txt");
  const auto report = load_report(out);
  EXPECT_EQ(report.runs.size(), 8u);
  EXPECT_EQ(report.derived.fit_rows.size(), 2u);
  EXPECT_TRUE(report.derived.fit.has_value());
  EXPECT_FALSE(report.derived.gpu_series.empty());
  EXPECT_TRUE(std::filesystem::exists(tmp.path() / "plots" / "series.csv"));
  EXPECT_TRUE(std::filesystem::exists(tmp.path() / "plots" / "samples.csv"));

  EXPECT_EQ(run_cli("report --verify --format csv --in " + out.string(),
                    tmp.path() / "verify.txt"),
            0)
      << slurp(tmp.path() / "verify.txt");
  EXPECT_NE(slurp(tmp.path() / "verify.txt").find("match"), std::string::npos);
}

TEST(Cli, PartialFailureExitsThree)
{
  testing::TempDir tmp;
  MockServer server(fast_mock(4));
  const auto data = tmp.write("hs.jsonl", testing::hellaswag_lines(10));
  const auto out = tmp.path() / "report.json";
  const int rc = run_cli("run -q --endpoint " + server.base_url() +
                             " --models pythia-70m --loads 8 --warmup 0 --dataset " +
                             data.string() +
                             " --power-source mock-http --sample-interval 0.01 --out " +
                             out.string(),
                         tmp.path() / "log.txt");
  EXPECT_EQ(rc, 3) << slurp(tmp.path() / "log.txt");
  ASSERT_TRUE(std::filesystem::exists(out));
  EXPECT_EQ(load_report(out).derived.failed_requests, 2u);
}

TEST(Cli, PlainLinesDataset)
{
  testing::TempDir tmp;
  MockServer server(fast_mock());
  const auto data = tmp.write("p.txt", "one\ntwo\nthree\n");
  const auto out = tmp.path() / "r.json";
  const int rc = run_cli("run -q --endpoint " + server.base_url() +
                             " --models m --loads 3 --warmup 0 --dataset " + data.string() +
                             " --dataset-format lines --power-source constant:10"
                             " --sample-interval 0.01 --out " + out.string(),
                         tmp.path() / "log.txt");
  EXPECT_EQ(rc, 0) << slurp(tmp.path() / "log.txt");
}

}  // namespace
}  // namespace ebench
