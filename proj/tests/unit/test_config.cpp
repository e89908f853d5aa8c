#include <gtest/gtest.h>

#include <algorithm>

#include "trapwalk/config.hpp"

using namespace trapwalk;

namespace {

bool mentions(const std::vector<std::string>& msgs, const std::string& key) {
  return std::any_of(msgs.begin(), msgs.end(), [&](const std::string& m) { return m.find(key) != std::string::npos; });
}

}  // namespace

TEST(Config, DefaultsAreAnnounced) {
  ConfigResult r = parse_config("[field]\ngamma = 0.5\n");
  ASSERT_TRUE(r.config.has_value());
  EXPECT_DOUBLE_EQ(r.config->field.K, 20.0);
  EXPECT_DOUBLE_EQ(r.config->regen.delta, 0.25);
  EXPECT_DOUBLE_EQ(r.config->regen.alpha, 6.0);
  EXPECT_TRUE(mentions(r.notices, "field.K"));
}

TEST(Config, RoundTripThroughIni) {
  ConfigResult r = parse_config(
      "[field]\ngamma = 0.7\nK = 5\nlambda = 2\ndirection = 2, 1\n[walk]\nsteps = 5000\nreplicas = 3\n"
      "[experiment]\nkind = clock\n");
  ASSERT_TRUE(r.config.has_value()) << (r.errors.empty() ? "" : r.errors.front());
  const std::string ini = to_ini(*r.config);
  ConfigResult back = parse_config(ini);
  ASSERT_TRUE(back.config.has_value());
  EXPECT_EQ(to_ini(*back.config), ini);
  EXPECT_TRUE(mentions(r.notices, "normalized"));
  EXPECT_NEAR(r.config->field.direction[0], 2.0 / std::sqrt(5.0), 1e-15);
}

TEST(Config, DeltaValidatedAgainstGamma) {
  ConfigResult r = parse_config("[field]\ngamma = 0.9\n[regen]\ndelta = 0.5\n");
  EXPECT_FALSE(r.config.has_value());
  EXPECT_TRUE(mentions(r.errors, "regen.delta"));
  EXPECT_TRUE(parse_config("[field]\ngamma = 0.9\n[regen]\ndelta = 0.2\n").config.has_value());
}

TEST(Config, UnknownKeysAndSectionsRejected) {
  ConfigResult r = parse_config("[field]\nlamda = 1\n[bogus]\nx = 1\n");
  EXPECT_FALSE(r.config.has_value());
  EXPECT_TRUE(mentions(r.errors, "field.lamda"));
  EXPECT_TRUE(mentions(r.errors, "[bogus]"));
}

TEST(Config, AllViolationsListed) {
  ConfigResult r = parse_config(
      "[field]\nK = 0.5\nlambda = -1\n[walk]\nsteps = 0\nreplicas = 0\ncompress_threshold = 3\n"
      "[regen]\nalpha = 2\n[experiment]\nkind = nope\n");
  EXPECT_FALSE(r.config.has_value());
  for (const char* key : {"field.K", "field.lambda", "walk.steps", "walk.replicas", "regen.alpha", "experiment.kind"})
    EXPECT_TRUE(mentions(r.errors, key)) << key;
  EXPECT_GE(r.errors.size(), 6u);
}

TEST(Config, StopLevelOnlyForBlockRuns) {
  EXPECT_TRUE(parse_config("[walk]\nstop_level = 100\n[experiment]\nkind = clock\n").config.has_value());
  EXPECT_FALSE(parse_config("[walk]\nstop_level = 100\n[experiment]\nkind = exponent\n").config.has_value());
  EXPECT_FALSE(parse_config("[walk]\nstop_level = 100\n[experiment]\nkind = fk\n").config.has_value());
}

TEST(Config, ParseErrorsNameTheKey) {
  ConfigResult r = parse_config("[walk]\nsteps = many\n");
  EXPECT_FALSE(r.config.has_value());
  EXPECT_TRUE(mentions(r.errors, "walk.steps"));
  EXPECT_FALSE(load_config("/nonexistent/run.ini").config.has_value());
}

TEST(Config, CheckpointTimes) {
  WalkSettings w;
  w.steps = 10000;
  w.first_checkpoint = 100;
  w.checkpoints_per_decade = 2;
  auto t = checkpoint_times(w);
  ASSERT_FALSE(t.empty());
  EXPECT_EQ(t.front(), 100);
  EXPECT_EQ(t.back(), 10000);
  EXPECT_TRUE(std::is_sorted(t.begin(), t.end()));
  EXPECT_EQ(std::adjacent_find(t.begin(), t.end()), t.end());
}
