#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "fairalloc/cli.hpp"

namespace fairalloc {
namespace {

namespace fs = std::filesystem;

struct Invocation {
  int code;
  std::string out;
  std::string err;
};

Invocation invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "fairalloc");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("fairalloc_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string write_config(const std::string& text) {
    const auto path = dir_ / "config.json";
    std::ofstream(path) << text;
    return path.string();
  }

  std::string fixture() {
    return write_config(R"({
      "policy": {"kind": "strict_rate_ucb", "min_rate": "1/2"},
      "env": {"kind": "co_tetris", "teammates": [{"p0": 1.0}, {"p0": 0.0}]},
      "horizon": 4, "replications": 2, "base_seed": 7,
      "out_dir": ")" + (dir_ / "out").string() + R"("
    })");
  }

  fs::path dir_;
};

TEST_F(CliTest, ValidateWellFormedConfig) {
  const auto r = invoke({"validate", "--config", fixture()});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("valid"), std::string::npos);
  EXPECT_FALSE(fs::exists(dir_ / "out"));
}

TEST_F(CliTest, ValidateInfeasibleRate) {
  const auto path = write_config(R"({
    "policy": {"kind": "strict_rate_ucb", "min_rate": "1/2"},
    "env": {"kind": "co_tetris", "teammates": [{"p0": 0.9}, {"p0": 0.5}, {"p0": 0.3}]},
    "horizon": 10
  })");
  const auto r = invoke({"validate", "--config", path});
  EXPECT_EQ(r.code, 3);
  EXPECT_NE(r.err.find("min_rate"), std::string::npos);
}

TEST_F(CliTest, TraceOfDeterministicFixture) {
  const auto r = invoke({"trace", "--config", fixture()});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out,
            "t,arm,reason,reward,cum_reward\n"
            "1,0,Initialization,1,1\n"
            "2,1,Initialization,0,1\n"
            "3,0,UcbExploit,1,2\n"
            "4,1,FairnessOverride,0,2\n");
  EXPECT_EQ(invoke({"trace", "--config", fixture(), "--rep", "1"}).out, r.out);
}

TEST_F(CliTest, TraceIsRepeatable) {
  const auto path = fixture();
  const std::vector<std::string> args{"trace", "--config", path, "--set",
                                      "env.teammates.0.p0=0.6", "--set", "horizon=200",
                                      "--rep", "1"};
  const auto a = invoke(args);
  const auto b = invoke(args);
  EXPECT_EQ(a.code, 0) << a.err;
  EXPECT_EQ(a.out, b.out);
}

TEST_F(CliTest, TraceRejectsMissingReplication) {
  const auto r = invoke({"trace", "--config", fixture(), "--rep", "5"});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("--rep"), std::string::npos);
}

TEST_F(CliTest, RunWritesResults) {
  const auto r = invoke({"run", "--config", fixture(), "--set", "write_traces=true"});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(std::count(r.out.begin(), r.out.end(), '\n'), 1);
  for (const char* f : {"summary.csv", "replications.csv", "trace.csv", "manifest.json"}) {
    EXPECT_TRUE(fs::exists(dir_ / "out" / f)) << f;
  }
}

TEST_F(CliTest, QuietSuppressesSummaryLine) {
  const auto r = invoke({"run", "--config", fixture(), "--quiet"});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(r.out.empty());
}

TEST_F(CliTest, SweepRunsEveryLevel) {
  const auto r = invoke({"sweep", "--config", fixture(), "--set", "sweep=[\"0\",\"1/4\",\"1/2\"]"});
  EXPECT_EQ(r.code, 0) << r.err;
  std::ifstream in(dir_ / "out" / "summary.csv");
  std::string line;
  int lines = 0;
  while (std::getline(in, line)) ++lines;
  EXPECT_EQ(lines, 4);
}

TEST_F(CliTest, SweepWithoutValuesIsInvalid) {
  EXPECT_EQ(invoke({"sweep", "--config", fixture()}).code, 2);
}

TEST_F(CliTest, SweepInfeasibleValue) {
  const auto r = invoke({"sweep", "--config", fixture(), "--set", "sweep=[\"0\",\"2/3\"]"});
  EXPECT_EQ(r.code, 3);
  EXPECT_NE(r.err.find("2/3"), std::string::npos);
  EXPECT_FALSE(fs::exists(dir_ / "out" / "summary.csv"));
}

TEST_F(CliTest, InvalidConfigs) {
  const auto broken = write_config("{ not json");
  EXPECT_EQ(invoke({"validate", "--config", broken}).code, 2);

  const auto typed = invoke({"validate", "--config", fixture(), "--set", "horizon=many"});
  EXPECT_EQ(typed.code, 2);
  EXPECT_NE(typed.err.find("horizon"), std::string::npos);

  const auto rate = invoke({"validate", "--config", fixture(), "--set", "policy.min_rate=abc"});
  EXPECT_EQ(rate.code, 2);
  EXPECT_NE(rate.err.find("policy.min_rate"), std::string::npos);
}

TEST_F(CliTest, UsageErrors) {
  EXPECT_EQ(invoke({}).code, 2);
  EXPECT_EQ(invoke({"run"}).code, 2);
  EXPECT_EQ(invoke({"frobnicate", "--config", "x"}).code, 2);
  EXPECT_EQ(invoke({"--help"}).code, 0);
}

TEST_F(CliTest, RuntimeFailures) {
  EXPECT_EQ(invoke({"validate", "--config", (dir_ / "missing.json").string()}).code, 1);
  std::ofstream(dir_ / "blocker") << "x";
  const auto r = invoke({"run", "--config", fixture(), "--set",
                         "out_dir=\"" + (dir_ / "blocker" / "out").string() + "\""});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("blocker"), std::string::npos);
}

}  // namespace
}  // namespace fairalloc
