#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "msvi/cli/config.hpp"
#include "msvi/cli/runner.hpp"

using namespace msvi;
using namespace msvi::cli;

namespace {

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::filesystem::path fresh_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / name;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

void expect_config_error(const std::string& text, const std::string& fragment) {
  try {
    parse_config(text, "test.cfg");
    FAIL() << "accepted: " << text;
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find(fragment), std::string::npos) << e.what();
  }
}

}  // namespace

TEST(Config, ParsesAndRecordsDefaults) {
  const auto c = parse_config(
      "# comment\n[run]\ncommand = fit\nmodel = logistic\nD = 4\nn = 10\ntheta = 0.7\n"
      "lr_theta = 1e-3\nlr_phi = 1e-5\nM = 7\nsites = 0 0; 1 0; 0 1; 1 1\n");
  EXPECT_EQ(c.command, Command::fit);
  EXPECT_EQ(c.M, 7u);
  EXPECT_EQ(c.sites.size(), 4u);
  EXPECT_EQ(c.sites[3].y, 1.0);
  EXPECT_EQ(c.R, 5000u);
  EXPECT_NE(std::find(c.defaulted.begin(), c.defaulted.end(), "R"), c.defaulted.end());
  std::ostringstream log;
  echo_defaults(c, log);
  EXPECT_NE(log.str().find("default: R = 5000"), std::string::npos);
}

TEST(Config, ErrorsNameTheLine) {
  expect_config_error("command = fit\nbogus = 1\n", "test.cfg:2: unknown key 'bogus'");
  expect_config_error("command = fit\ncommand = mle\n", "test.cfg:2");
  expect_config_error("command fit\n", "test.cfg:1");
  expect_config_error("command = fit\nmodel = logistic\nD = 3\nn = 5\ntheta = 0.5\nlr_phi = 1\n",
                      "lr_theta");
  expect_config_error("command = simulate\nmodel = logistic\nD = 3\nn = x\ntheta = 0.5\n",
                      "test.cfg:4");
  expect_config_error(
      "command = simulate\nmodel = logistic\nD = 3\nn = 5\ntheta = 0.5\nrecord_partitions = true\n",
      "record_partitions");
  expect_config_error(
      "command = mle\nmodel = brown_resnick\nD = 8\nn = 5\nrange = 1\nsmoothness = 1\n", "D");
}

TEST(Config, HashIgnoresThreadsAndOutput) {
  const std::string text =
      "command = simulate\nmodel = logistic\nD = 3\nn = 5\ntheta = 0.5\nseed = 3\n";
  auto a = parse_config(text);
  auto b = parse_config(text + "threads = 4\nout = elsewhere\n");
  EXPECT_EQ(config_hash(a), config_hash(b));
  apply_overrides(b, 4, std::nullopt, std::nullopt);
  EXPECT_NE(config_hash(a), config_hash(b));
  EXPECT_EQ(b.seed, 4u);
  EXPECT_EQ(provenance_line(a).rfind("# msvi ", 0), 0u);
}

TEST(Stats, QuantilesOutliersAndBootstrap) {
  const std::vector<double> sorted{1, 2, 3, 4};
  EXPECT_DOUBLE_EQ(quantile_sorted(sorted, 0.5), 2.5);
  EXPECT_DOUBLE_EQ(quantile_sorted(sorted, 0.25), 1.75);
  const std::vector<double> values{1.0, 1.1, 0.9, 1.05, 0.95, 50.0};
  const auto flags = flag_outliers(values);
  EXPECT_EQ(flags, (std::vector<bool>{false, false, false, false, false, true}));
  const std::vector<double> three{1.0, 2.0, 100.0};
  EXPECT_EQ(flag_outliers(three), (std::vector<bool>{false, false, false}));
  RandomStream rng(1, 0);
  const auto s = summarize(values, rng, 2000);
  EXPECT_EQ(s.n, values.size());
  EXPECT_LE(s.ci_lo, s.mean);
  EXPECT_GE(s.ci_hi, s.mean);
}

TEST(Runner, SimulateWritesReproducibleCsv) {
  const auto dir = fresh_dir("msvi_cli_simulate");
  auto c = parse_config(
      "command = simulate\nmodel = brown_resnick\nD = 4\nn = 6\nrange = 1.5\nsmoothness = 1\n"
      "record_partitions = true\nseed = 11\n");
  c.out = dir / "a";
  std::ostringstream log;
  ASSERT_EQ(run_experiment(c, log), kExitOk) << log.str();
  c.out = dir / "b";
  c.threads = 2;
  ASSERT_EQ(run_experiment(c, log), kExitOk) << log.str();
  for (const char* f : {"sites.csv", "observations.csv", "partitions.csv"}) {
    const auto a = read_file(dir / "a" / f);
    EXPECT_FALSE(a.empty()) << f;
    EXPECT_EQ(a.rfind("# msvi ", 0), 0u) << f;
    EXPECT_EQ(a, read_file(dir / "b" / f)) << f;
  }
  const auto data = read_dataset_csv(dir / "a" / "sites.csv", dir / "a" / "observations.csv");
  EXPECT_EQ(data.dim(), 4u);
  EXPECT_EQ(data.replicates(), 6u);
}

TEST(Presets, AllParse) {
  std::size_t count = 0;
  for (const auto& entry : std::filesystem::directory_iterator(MSVI_PRESET_DIR)) {
    if (entry.path().extension() != ".cfg") continue;
    EXPECT_NO_THROW(load_config(entry.path())) << entry.path();
    ++count;
  }
  EXPECT_GE(count, 6u);
}
