#include <gtest/gtest.h>

#ifdef EBENCH_HARDWARE_SOURCES
#include <thread>

#include "ebench/hw_sources.hpp"
#include "test_util.hpp"

namespace ebench {
namespace {

TEST(NvidiaSmi, ParsesPowerLine)
{
  EXPECT_DOUBLE_EQ(*parse_nvidia_smi_power("123.45\n"), 123.45);
  EXPECT_DOUBLE_EQ(*parse_nvidia_smi_power("  87.00 "), 87.0);
  EXPECT_FALSE(parse_nvidia_smi_power("[N/A]"));
  EXPECT_FALSE(parse_nvidia_smi_power(""));
}

TEST(Rapl, CounterWrap)
{
  EXPECT_EQ(rapl_delta_uj(100, 250, 1000), 150u);
  EXPECT_EQ(rapl_delta_uj(900, 50, 1000), 150u);
}

TEST(Rapl, ReadsFakePowercapZone)
{
  testing::TempDir tmp;
  tmp.write("max_energy_range_uj", "262143328850\n");
  tmp.write("energy_uj", "1000000\n");
  RaplSource src(tmp.path());
  src.init();
  std::this_thread::sleep_for(std::chrono::milliseconds(100));
  tmp.write("energy_uj", "6000000\n");  // +5 J
  const double w = src.read_watts();
  EXPECT_GT(w, 5.0 / 0.2);
  EXPECT_LT(w, 5.0 / 0.099);
}

TEST(Rapl, MissingZoneFailsInit)
{
  RaplSource src("/nonexistent/intel-rapl:9");
  EXPECT_THROW(src.init(), std::exception);
}

}  // namespace
}  // namespace ebench
#endif
