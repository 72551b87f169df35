#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "burgers/cli.hpp"

using namespace burgers;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  auto p = fs::temp_directory_path() / ("burgers_cli_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(BURGERS_CLI_PATH) + " " + args + " 2>/dev/null";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream s;
  s << f.rdbuf();
  return s.str();
}

} // namespace

TEST(Config, DefaultsAndFlags) {
  auto c = parse_config(std::vector<std::string>{"control-inviscid", "--L", "1", "--T", "2", "--n", "201"});
  EXPECT_EQ(c.command, "control-inviscid");
  EXPECT_EQ(c.n, 201u);
  EXPECT_EQ(c.T, 2.0);
  EXPECT_EQ(c.eta, 0.25);
  EXPECT_EQ(c.alpha, 0.1);
  EXPECT_EQ(c.tau_or_default(), 0.1);
  EXPECT_EQ(c.alpha_list(), std::vector<double>{0.1});
}

TEST(Config, InvalidValuesAreConfigErrors) {
  EXPECT_THROW(parse_config(std::vector<std::string>{"simulate", "--n", "2"}), ConfigError);
  EXPECT_THROW(parse_config(std::vector<std::string>{"simulate", "--eta", "0.6"}), ConfigError);
  EXPECT_THROW(parse_config(std::vector<std::string>{"simulate", "--bogus", "1"}), ConfigError);
  EXPECT_THROW(parse_config(std::vector<std::string>{"fly"}), ConfigError);
  EXPECT_THROW(parse_config(std::vector<std::string>{"sweep", "--sweep", "tau"}), ConfigError);
}

TEST(Config, FileValuesAndFlagOverrides) {
  const auto dir = scratch("config");
  const auto file = dir / "run.toml";
  std::ofstream(file) << "command = \"smooth\"\nn = 51\nalpha = 0.5\nalphas = [0.05, 0.5]\n";
  auto c = parse_config(std::vector<std::string>{"--config", file.string(), "--alpha", "0.2"});
  EXPECT_EQ(c.command, "smooth");
  EXPECT_EQ(c.n, 51u);
  EXPECT_EQ(c.alpha, 0.2);
  EXPECT_EQ(c.alphas, (std::vector<double>{0.05, 0.5}));
  EXPECT_EQ(c.overridden, std::vector<std::string>{"alpha"});
  std::ofstream(file) << "nodes = 51\n";
  try {
    parse_config(std::vector<std::string>{"simulate", "--config", file.string()});
    FAIL() << "expected a config error";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("valid keys"), std::string::npos);
  }
}

TEST(Config, ResolvedJsonRecordsEverything) {
  auto c = parse_config(std::vector<std::string>{"approx", "--alpha", "0.3"});
  auto j = config_json(c);
  EXPECT_EQ(j["command"], "approx");
  EXPECT_EQ(j["alpha"], 0.3);
  EXPECT_EQ(j["tau"], 0.05);
  EXPECT_TRUE(j.contains("version"));
}

TEST(Profiles, AllKinds) {
  auto g = make_grid(0, 2, 41);
  EXPECT_EQ(sup_abs(make_profile("zero", g).view()), 0.0);
  EXPECT_EQ(make_profile("const:0.7", g)[13], 0.7);
  auto s = make_profile("sin:1:2", g);
  EXPECT_NEAR(s[20], 2.0, 1e-14);
  EXPECT_NEAR(s[40], 0.0, 1e-14);
  auto b = make_profile("bump:1:0.5:3", g);
  EXPECT_NEAR(b[20], 3.0, 1e-14);
  EXPECT_EQ(b[0], 0.0);
  const auto dir = scratch("profile");
  std::ofstream(dir / "p.csv") << "x,value\n0,0\n1,1\n2,0\n";
  auto c = make_profile("csv:" + (dir / "p.csv").string(), g);
  EXPECT_NEAR(c[10], 0.5, 1e-14);
  EXPECT_NEAR(c[20], 1.0, 1e-14);
  for (const char* bad : {"sin:1", "bump:1:0:1", "wave:1", "const:x", "sin:1:2:3"})
    EXPECT_THROW(make_profile(bad, g), ConfigError) << bad;
  std::ofstream(dir / "short.csv") << "x,value\n0,0\n1,1\n";
  EXPECT_THROW(make_profile("csv:" + (dir / "short.csv").string(), g), ConfigError);
}

TEST(Binary, ExitCodes) {
  const auto dir = scratch("exit");
  EXPECT_EQ(run_cli("simulate --n 2"), 2);
  EXPECT_EQ(run_cli("simulate --n 41 --m 20 --out " + (dir / "ok").string()), 0);
  // explicit steps far beyond the parabolic limit break the max principle
  EXPECT_EQ(run_cli("simulate --n 101 --m 2 --theta 0 --rannacher false --max_halvings 0 --profile bump:0.5:0.05:1 --out " +
                    (dir / "mp").string()),
            4);
  EXPECT_EQ(run_cli("control-inviscid --n 41 --m 40 --picard_max_iter 1 --delta_hat 0.77 --out " +
                    (dir / "cv").string()),
            5);
  const auto v = json::parse(slurp(dir / "cv" / "verdict.json"));
  EXPECT_FALSE(v["all_pass"].get<bool>());
  EXPECT_EQ(v["error"]["type"], "convergence");
}

TEST(Binary, ArtifactsAndDeterminism) {
  const auto dir = scratch("det");
  const std::string args = "control-inviscid --n 41 --m 40 --delta_hat 0.77 --profile sin:1:0.3 --out ";
  ASSERT_EQ(run_cli(args + (dir / "a").string()), 0);
  ASSERT_EQ(run_cli(args + (dir / "b").string()), 0);
  for (const char* f : {"trajectory.csv", "controls.csv", "final.csv"}) {
    ASSERT_TRUE(fs::exists(dir / "a" / f)) << f;
    EXPECT_EQ(slurp(dir / "a" / f), slurp(dir / "b" / f)) << f;
  }
  EXPECT_EQ(slurp(dir / "a" / "controls.csv").substr(0, 12), "t,p,v_l,v_r\n");
  EXPECT_EQ(slurp(dir / "a" / "trajectory.csv").substr(0, 10), "t,x,value\n");
  const auto verdict = json::parse(slurp(dir / "a" / "verdict.json"));
  EXPECT_TRUE(verdict["all_pass"].get<bool>());
  const auto cfg = json::parse(slurp(dir / "a" / "config.resolved.json"));
  EXPECT_EQ(cfg["n"], 41);
  EXPECT_TRUE(fs::exists(dir / "a" / "report.json"));
}

TEST(Binary, OutputRootFromEnvironment) {
  const auto dir = scratch("env");
  RunConfig c = parse_config(std::vector<std::string>{"simulate", "--n", "21", "--m", "10"});
  ::setenv(output_root_env(), dir.string().c_str(), 1);
  EXPECT_EQ(output_dir(c), dir / "simulate");
  std::ostringstream log;
  EXPECT_EQ(run(c, log), 0);
  ::unsetenv(output_root_env());
  EXPECT_TRUE(fs::exists(dir / "simulate" / "final.csv"));
}
