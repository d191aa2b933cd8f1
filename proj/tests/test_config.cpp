#include <gtest/gtest.h>

#include "fairalloc/config.hpp"

namespace fairalloc {
namespace {

using nlohmann::json;

json base_doc() {
  return json::parse(R"({
    "policy": {"kind": "strict_rate_ucb", "min_rate": "1/2", "exploration_coeff": 2.0},
    "env": {"kind": "co_tetris", "teammates": [{"p0": 0.9}, {"p0": 0.3, "p_max": 0.6, "lambda": 0.01}]},
    "horizon": 100, "replications": 3, "base_seed": 42
  })");
}

std::string error_of(const json& doc) {
  try {
    parse_config(doc);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

TEST(ParseConfig, ReadsAllFields) {
  auto doc = base_doc();
  doc["sweep"] = {"0", "1/4", 0};
  doc["out_dir"] = "out";
  doc["write_traces"] = true;
  doc["threads"] = 4;
  const auto cfg = parse_config(doc);
  EXPECT_EQ(cfg.policy.kind, PolicyKind::kStrictRateUcb);
  EXPECT_EQ(cfg.policy.fairness.min_rate, Rational(1, 2));
  EXPECT_EQ(cfg.env.kind, EnvKind::kCoTetris);
  ASSERT_EQ(cfg.env.teammates.size(), 2u);
  EXPECT_EQ(cfg.env.teammates[0].max_skill, 0.9);
  EXPECT_EQ(cfg.env.teammates[1].learning_rate, 0.01);
  EXPECT_EQ(cfg.horizon(), 100u);
  EXPECT_EQ(cfg.replications, 3u);
  EXPECT_EQ(cfg.base_seed, 42u);
  EXPECT_EQ(cfg.sweep, (std::vector<Rational>{{0, 1}, {1, 4}, {0, 1}}));
  EXPECT_EQ(cfg.out_dir, "out");
  EXPECT_TRUE(cfg.write_traces);
  EXPECT_EQ(cfg.threads, 4u);
  EXPECT_EQ(cfg.source, doc);
}

TEST(ParseConfig, SpaceInvadersRates) {
  auto doc = base_doc();
  doc["env"] = json::parse(R"({"kind": "space_invaders", "base_rate": 0.5, "support_boost": 0.3, "epoch_length": 5})");
  auto cfg = parse_config(doc);
  EXPECT_EQ(cfg.env.base_rate, (std::vector<double>{0.5, 0.5}));
  EXPECT_EQ(cfg.arm_count(), 2u);
  doc["env"]["base_rate"] = {0.4, 0.6};
  doc["env"]["support_boost"] = 0.5;
  EXPECT_NE(error_of(doc).find("base_rate + support_boost"), std::string::npos);
}

TEST(ParseConfig, ErrorsNameTheOffendingKey) {
  auto missing = base_doc();
  missing.erase("horizon");
  EXPECT_NE(error_of(missing).find("horizon"), std::string::npos);

  auto typed = base_doc();
  typed["horizon"] = "100";
  EXPECT_NE(error_of(typed).find("horizon"), std::string::npos);

  auto negative = base_doc();
  negative["replications"] = -1;
  EXPECT_NE(error_of(negative).find("replications"), std::string::npos);

  auto unknown = base_doc();
  unknown["policy"]["gamma"] = 1;
  EXPECT_NE(error_of(unknown).find("policy.gamma"), std::string::npos);

  auto bad_rate = base_doc();
  bad_rate["policy"]["min_rate"] = "one half";
  EXPECT_NE(error_of(bad_rate).find("policy.min_rate"), std::string::npos);

  auto big_rate = base_doc();
  big_rate["policy"]["min_rate"] = "3/2";
  EXPECT_NE(error_of(big_rate).find("policy.min_rate"), std::string::npos);

  auto bad_kind = base_doc();
  bad_kind["policy"]["kind"] = "thompson";
  EXPECT_NE(error_of(bad_kind).find("policy.kind"), std::string::npos);

  auto bad_skill = base_doc();
  bad_skill["env"]["teammates"][1]["p0"] = 1.5;
  EXPECT_NE(error_of(bad_skill).find("teammates[1].p0"), std::string::npos);

  auto zero_horizon = base_doc();
  zero_horizon["horizon"] = 0;
  EXPECT_NE(error_of(zero_horizon).find("horizon"), std::string::npos);
}

TEST(ParseConfig, InfeasibleRateIsItsOwnError) {
  auto doc = base_doc();
  doc["env"]["teammates"].push_back({{"p0", 0.5}});
  try {
    parse_config(doc);
    FAIL() << "expected InfeasibleError";
  } catch (const InfeasibleError& e) {
    EXPECT_NE(std::string(e.what()).find("min_rate"), std::string::npos);
  }

  auto sweep = base_doc();
  sweep["sweep"] = {"0", "2/3"};
  try {
    parse_config(sweep);
    FAIL() << "expected InfeasibleError";
  } catch (const InfeasibleError& e) {
    EXPECT_NE(std::string(e.what()).find("2/3"), std::string::npos);
  }
}

TEST(ApplyOverride, DottedKeysAndTyping) {
  auto doc = base_doc();
  apply_override(doc, "policy.min_rate=1/4");
  apply_override(doc, "horizon=250");
  apply_override(doc, "env.teammates.1.p0=0.2");
  apply_override(doc, "sweep=[\"0\",\"1/2\"]");
  apply_override(doc, "policy.kind=ucb1");
  const auto cfg = parse_config(doc);
  EXPECT_EQ(cfg.policy.fairness.min_rate, Rational(1, 4));
  EXPECT_EQ(cfg.horizon(), 250u);
  EXPECT_EQ(cfg.env.teammates[1].base_skill, 0.2);
  EXPECT_EQ(cfg.sweep.size(), 2u);
  EXPECT_EQ(cfg.policy.kind, PolicyKind::kUcb1);
}

TEST(ApplyOverride, TypeCheckedLikeFileValues) {
  auto doc = base_doc();
  apply_override(doc, "horizon=lots");
  EXPECT_NE(error_of(doc).find("horizon"), std::string::npos);
}

TEST(ApplyOverride, RejectsMalformedAssignments) {
  auto doc = base_doc();
  EXPECT_THROW(apply_override(doc, "horizon"), ConfigError);
  EXPECT_THROW(apply_override(doc, "=3"), ConfigError);
  EXPECT_THROW(apply_override(doc, "policy..kind=ucb1"), ConfigError);
  EXPECT_THROW(apply_override(doc, "env.teammates.7.p0=0.2"), ConfigError);
  EXPECT_THROW(apply_override(doc, "horizon.x=1"), ConfigError);
}

TEST(LoadConfig, MissingFileIsIoError) {
  EXPECT_THROW(load_config("/nonexistent/config.json"), IoError);
}

}  // namespace
}  // namespace fairalloc
