// Drives the bayes_cli binary end to end; its path comes from BAYES_CLI.

#include <sys/wait.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "bayes/error.hpp"
#include "bayes/scenarios.hpp"

namespace {

namespace fs = std::filesystem;

struct CliResult {
  int exit_code;
  std::map<std::string, std::string> metrics;
  std::string stdout_text;
};

std::string cli_path() {
  const char* p = std::getenv("BAYES_CLI");
  return p ? p : "";
}

CliResult run_cli(const std::string& args) {
  const std::string cmd = "'" + cli_path() + "' " + args + " 2>/dev/null";
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) throw std::runtime_error("popen failed");
  std::string text;
  std::array<char, 4096> buf{};
  while (fgets(buf.data(), buf.size(), pipe)) text += buf.data();
  const int status = pclose(pipe);
  CliResult r{WIFEXITED(status) ? WEXITSTATUS(status) : -1, {}, text};
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) {
    const auto eq = line.find('=');
    if (eq != std::string::npos && line.find(' ') == std::string::npos) {
      r.metrics[line.substr(0, eq)] = line.substr(eq + 1);
    }
  }
  return r;
}

double metric(const CliResult& r, const std::string& key) {
  const auto it = r.metrics.find(key);
  if (it == r.metrics.end()) throw std::runtime_error("missing metric " + key + "\n" + r.stdout_text);
  return std::stod(it->second);
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

class ScenarioTest : public ::testing::Test {
 protected:
  void SetUp() override {
    if (cli_path().empty()) GTEST_SKIP() << "BAYES_CLI not set";
    dir_ = fs::temp_directory_path() /
           ("bayes_scen_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string out(const std::string& sub) const {
    fs::create_directories(dir_ / sub);
    return " --out '" + (dir_ / sub).string() + "'";
  }

  fs::path dir_;
};

TEST_F(ScenarioTest, KalmanDefaultsBeatRawObservations) {
  const auto r = run_cli("kalman-ar2" + out("a"));
  ASSERT_EQ(r.exit_code, 0) << r.stdout_text;
  EXPECT_LT(metric(r, "rmse_filtered"), metric(r, "rmse_raw"));
  EXPECT_TRUE(fs::exists(dir_ / "a" / "kalman_ar2.csv"));
}

TEST_F(ScenarioTest, KalmanUninformativeObservationsDoNotCrash) {
  const auto r = run_cli("kalman-ar2 --r 1e12" + out("a"));
  ASSERT_EQ(r.exit_code, 0);
  EXPECT_TRUE(std::isfinite(metric(r, "rmse_filtered")));
}

TEST_F(ScenarioTest, SameSeedGivesIdenticalCsv) {
  const std::map<std::string, std::vector<std::string>> files{
      {"kalman-ar2", {"kalman_ar2.csv"}},
      {"pf-ungm", {"pf_ungm.csv"}},
      {"gp-demo", {"gp_demo_training.csv", "gp_demo_prediction.csv"}}};
  for (const auto& [scenario, names] : files) {
    ASSERT_EQ(run_cli(scenario + " --seed 7" + out(scenario + "1")).exit_code, 0);
    ASSERT_EQ(run_cli(scenario + " --seed 7" + out(scenario + "2")).exit_code, 0);
    for (const auto& f : names) {
      const std::string a = read_file(dir_ / (scenario + "1") / f);
      EXPECT_FALSE(a.empty()) << f;
      EXPECT_EQ(a, read_file(dir_ / (scenario + "2") / f)) << f;
    }
  }
}

TEST_F(ScenarioTest, UngmDefaultsResample) {
  const auto r = run_cli("pf-ungm" + out("a"));
  ASSERT_EQ(r.exit_code, 0);
  EXPECT_TRUE(std::isfinite(metric(r, "rmse")));
  EXPECT_GE(metric(r, "resample_count"), 1.0);
}

TEST_F(ScenarioTest, TwoParticlesCompleteOrFailNumerically) {
  const auto r = run_cli("pf-ungm --n_particles 2" + out("a"));
  EXPECT_TRUE(r.exit_code == 0 || r.exit_code == 3) << r.exit_code;
}

TEST_F(ScenarioTest, ResamplingKeepsMoreEffectiveParticles) {
  const auto sis = run_cli("pf-ungm --seed 3 --resample_frac 0" + out("a"));
  const auto pf = run_cli("pf-ungm --seed 3 --resample_frac 0.25" + out("b"));
  ASSERT_EQ(sis.exit_code, 0);
  ASSERT_EQ(pf.exit_code, 0);
  EXPECT_GE(metric(pf, "final_ess"), metric(sis, "final_ess"));
}

TEST_F(ScenarioTest, GpDemoTrainingTargetsInsideBand) {
  std::vector<double> inside;
  for (int seed = 1; seed <= 20; ++seed) {
    const auto r = run_cli("gp-demo --seed " + std::to_string(seed) + out("s"));
    ASSERT_EQ(r.exit_code, 0);
    inside.push_back(metric(r, "train_inside_band"));
  }
  std::nth_element(inside.begin(), inside.begin() + 10, inside.end());
  EXPECT_GE(inside[10], 10.0);
}

TEST_F(ScenarioTest, GpDemoBandRevertsToPriorFarAway) {
  const auto r = run_cli("gp-demo --test_hi 20 --test_step 0.01" + out("a"));
  ASSERT_EQ(r.exit_code, 0);
  EXPECT_NEAR(metric(r, "edge_band_halfwidth"), 2.0 * std::sqrt(1.1), 0.02 * 2.0 * std::sqrt(1.1));
}

TEST_F(ScenarioTest, GpTrainConverges) {
  const auto r = run_cli("gp-train" + out("a"));
  ASSERT_EQ(r.exit_code, 0) << r.stdout_text;
  EXPECT_LT(metric(r, "grad_norm"), 1e-4);
  EXPECT_NE(r.stdout_text.find("se.length log="), std::string::npos);
}

TEST_F(ScenarioTest, GpTrainOnDatasetFile) {
  {
    std::ofstream f(dir_ / "data.csv");
    f << "x,y\n";
    for (int i = 0; i < 20; ++i) f << -2.0 + 0.2 * i << ',' << std::sin(-2.0 + 0.2 * i) << '\n';
  }
  const auto r = run_cli("gp-train --dataset '" + (dir_ / "data.csv").string() + "'" + out("a"));
  ASSERT_EQ(r.exit_code, 0) << r.stdout_text;
  EXPECT_TRUE(std::isfinite(metric(r, "final_lml")));
}

TEST_F(ScenarioTest, MissingDatasetIsIoError) {
  const auto r = run_cli("gp-train --dataset '" + (dir_ / "nope.csv").string() + "'" + out("a"));
  EXPECT_EQ(r.exit_code, 4);
}

TEST_F(ScenarioTest, GpPfDemoRatioBounded) {
  const auto r = run_cli("gp-pf-demo" + out("a"));
  ASSERT_EQ(r.exit_code, 0) << r.stdout_text;
  EXPECT_GT(metric(r, "rmse_known"), 0.0);
  EXPECT_LE(metric(r, "rmse_ratio"), 2.0);
}

TEST_F(ScenarioTest, ConfigFileAppliesAndFlagsWin) {
  {
    std::ofstream f(dir_ / "cfg.txt");
    f << "# AR(2) overrides\nsteps = 40\nr=0.5\nseed=3\n";
  }
  const std::string cfg = " --config '" + (dir_ / "cfg.txt").string() + "'";
  const auto from_file = run_cli("kalman-ar2" + cfg + out("a"));
  ASSERT_EQ(from_file.exit_code, 0);
  EXPECT_EQ(metric(from_file, "steps"), 40.0);
  const auto flagged = run_cli("kalman-ar2" + cfg + " --steps 25" + out("b"));
  ASSERT_EQ(flagged.exit_code, 0);
  EXPECT_EQ(metric(flagged, "steps"), 25.0);
  EXPECT_EQ(metric(flagged, "seed"), 3.0);
}

TEST_F(ScenarioTest, ConfigErrorsExitWithTwo) {
  {
    std::ofstream f(dir_ / "bad.txt");
    f << "no_such_key=1\n";
  }
  EXPECT_EQ(run_cli("kalman-ar2 --config '" + (dir_ / "bad.txt").string() + "'" + out("a")).exit_code, 2);
  EXPECT_EQ(run_cli("kalman-ar2 --steps abc" + out("a")).exit_code, 2);
  EXPECT_EQ(run_cli("kalman-ar2 --bogus 1" + out("a")).exit_code, 2);
  EXPECT_EQ(run_cli("pf-ungm --n_particles 1" + out("a")).exit_code, 2);
  EXPECT_EQ(run_cli("no-such-scenario").exit_code, 2);
}

TEST(ScenarioConfigTest, UnknownKeyRejected) {
  bayes::scenarios::ScenarioConfig cfg;
  cfg.scenario = "pf-ungm";
  std::istringstream in("n_particles=100\n# comment\nwhatever=2\n");
  EXPECT_THROW(bayes::scenarios::apply_config_text(cfg, in), bayes::ConfigError);
  EXPECT_EQ(cfg.number("n_particles"), 100.0);
  EXPECT_EQ(cfg.number("steps"), 50.0);
}

}  // namespace
