#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "clusterflex/env.hpp"
#include "clusterflex/reward.hpp"
#include "test_support.hpp"

using namespace clusterflex;
namespace ts = testing_support;

namespace {

ClusterEnv case_env(ActionMapping mapping = ActionMapping::relative_incremental, ActionMode mode = ActionMode::box) {
  EnvOptions o;
  o.mapping = mapping;
  o.mode = mode;
  return ClusterEnv(ts::case_study_hub(), o);
}

bool on_grid(double v, double g) { return std::abs(v / g - std::round(v / g)) < 1e-9; }

}  // namespace

// ---------------------------------------------------------------- action mapping

TEST(RelativeMapping, DeltaTableMatchesRoundingRule) {
  for (int i = -10; i <= 10; ++i) {
    const double a = 0.1 * i;
    const double expected = 0.1 * static_cast<double>(std::lround(5.0 * a));  // lround: half away from zero
    EXPECT_EQ(relative_delta(a), quantize(expected, 0.1)) << "a=" << a;
  }
  EXPECT_DOUBLE_EQ(relative_delta(1.0), 0.5);
  EXPECT_DOUBLE_EQ(relative_delta(-1.0), -0.5);
  EXPECT_DOUBLE_EQ(relative_delta(0.1), 0.1);  // 0.5 rounds away from zero
  EXPECT_DOUBLE_EQ(relative_delta(-0.1), -0.1);
  EXPECT_DOUBLE_EQ(relative_delta(0.09), 0.0);
  EXPECT_DOUBLE_EQ(relative_delta(3.0), 0.5);  // clipped to [-1, 1]
}

TEST(RelativeMapping, Examples) {
  EXPECT_DOUBLE_EQ(map_action_relative(1.0, 24.0, 23.0, 25.0), 24.5);
  EXPECT_DOUBLE_EQ(map_action_relative(0.0, 24.3, 23.0, 25.0), 24.3);
  EXPECT_DOUBLE_EQ(map_action_relative(1.0, 24.8, 23.0, 25.0), 25.0);
  EXPECT_DOUBLE_EQ(map_action_relative(-1.0, 10.2, 10.0, 15.0), 10.0);
}

TEST(RelativeMapping, RandomWalkStaysOnGridAndInBounds) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  double t = 12.5;
  for (int i = 0; i < 100000; ++i) {
    const double next = map_action_relative(u(rng), t, 10.0, 15.0);
    ASSERT_LE(std::abs(next - t), 0.5 + 1e-12);
    ASSERT_GE(next, 10.0);
    ASSERT_LE(next, 15.0);
    ASSERT_TRUE(on_grid(next, 0.1)) << next;
    t = next;
  }
}

TEST(AbsoluteMapping, EndpointsAndMidpoint) {
  EXPECT_DOUBLE_EQ(map_action_absolute(-1.0, 10.0, 15.0, 0.1), 10.0);
  EXPECT_DOUBLE_EQ(map_action_absolute(1.0, 10.0, 15.0, 0.1), 15.0);
  EXPECT_DOUBLE_EQ(map_action_absolute(0.0, 10.0, 15.0, 0.1), 12.5);
  EXPECT_DOUBLE_EQ(map_action_absolute(0.5, 23.0, 25.0, 0.1), 24.5);
  EXPECT_DOUBLE_EQ(map_action_absolute(0.33, 10.0, 15.0, 0.1), 13.3);  // 13.325 -> 13.3
}

TEST(DiscreteMapping, BinsCoverRange) {
  EXPECT_EQ(discrete_bin_count(10.0, 15.0, 0.1), 51);
  EXPECT_EQ(discrete_bin_count(23.0, 25.0, 0.1), 21);
  EXPECT_DOUBLE_EQ(map_action_discrete(0, 10.0, 15.0, 0.1), 10.0);
  EXPECT_DOUBLE_EQ(map_action_discrete(50, 10.0, 15.0, 0.1), 15.0);
  EXPECT_DOUBLE_EQ(map_action_discrete(23, 10.0, 15.0, 0.1), 12.3);
  EXPECT_THROW(map_action_discrete(51, 10.0, 15.0, 0.1), RangeError);
  EXPECT_THROW(map_action_discrete(-1, 10.0, 15.0, 0.1), RangeError);
}

TEST(ActionConfig, ParseErrorsCarryPath) {
  EXPECT_EQ(parse_action_mode("box", "m"), ActionMode::box);
  EXPECT_EQ(parse_action_mapping("absolute", "m"), ActionMapping::absolute);
  try {
    parse_action_mode("grid", "env.action_mode");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.path(), "env.action_mode");
  }
}

// ---------------------------------------------------------------- reward

TEST(PowerPenalty, SumsToThreshold) {
  const std::vector<double> coils{40000, 40000}, fans{10000, 13500};
  const auto p = power_penalty(coils, fans, 103500.0);
  EXPECT_DOUBLE_EQ(p.total, 103500.0);
  EXPECT_DOUBLE_EQ(p.p_hvac, 1.0);
}

TEST(PowerPenalty, ZerosGiveZero) {
  const std::vector<double> z(4, 0.0);
  EXPECT_EQ(power_penalty(z, z, 103500.0).p_hvac, 0.0);
}

TEST(PowerPenalty, BaselinePeakRatio) {
  const std::vector<double> coils{113320.0}, fans{0.0};
  EXPECT_NEAR(power_penalty(coils, fans, 103500.0).p_hvac, 113320.0 / 103500.0, 1e-15);
  EXPECT_NEAR(power_penalty(coils, fans, 103500.0).p_hvac, 1.0949, 1e-4);
}

TEST(PowerPenalty, RejectsNegativePowerAndBadThreshold) {
  const std::vector<double> bad{-1.0}, ok{1.0};
  EXPECT_THROW(power_penalty(bad, ok, 1.0), NumericError);
  EXPECT_THROW(power_penalty(ok, ok, 0.0), RangeError);
}

TEST(ComfortPenalty, Examples) {
  const std::vector<double> hot{26.5}, fine{24.0}, mild{25.4}, cold{22.0};
  EXPECT_DOUBLE_EQ(comfort_penalty(hot, 23, 25, 12.0, 8, 18), 2.25);
  EXPECT_DOUBLE_EQ(comfort_penalty(fine, 23, 25, 12.0, 8, 18), 0.0);
  EXPECT_DOUBLE_EQ(comfort_penalty(hot, 23, 25, 3.0, 8, 18), 0.0);
  EXPECT_NEAR(comfort_penalty(mild, 23, 25, 12.0, 8, 18), 0.4, 1e-12);
  EXPECT_DOUBLE_EQ(comfort_penalty(cold, 23, 25, 12.0, 8, 18), 1.0);
  const std::vector<double> many{26.5, 24.0, 25.4, 22.0};
  EXPECT_NEAR(comfort_penalty(many, 23, 25, 12.0, 8, 18), 2.25 + 0.4 + 1.0, 1e-12);
}

TEST(ComfortPenalty, OccupiedWindowIsHalfOpen) {
  const std::vector<double> hot{26.5};
  EXPECT_GT(comfort_penalty(hot, 23, 25, 8.0, 8, 18), 0.0);
  EXPECT_EQ(comfort_penalty(hot, 23, 25, 17.75, 8, 18), 2.25);
  EXPECT_EQ(comfort_penalty(hot, 23, 25, 18.0, 8, 18), 0.0);
  EXPECT_EQ(comfort_penalty(hot, 23, 25, 7.75, 8, 18), 0.0);
}

TEST(PeakPenalty, Examples) {
  EXPECT_DOUBLE_EQ(peak_penalty(50000.0, 103500.0, 50000.0 / 103500.0), -0.5);
  EXPECT_DOUBLE_EQ(peak_penalty(103500.0, 103500.0, 1.0), 1.0);
  const double p = 113320.0 / 103500.0;
  EXPECT_NEAR(peak_penalty(113320.0, 103500.0, p), p * p, 1e-15);
  EXPECT_NEAR(peak_penalty(113320.0, 103500.0, p), 1.1988, 1e-4);
}

TEST(ComputeReward, Examples) {
  const RewardConfig c;
  EXPECT_NEAR(compute_reward(0, 0.8, 0.0, -0.5, c).reward, 0.6, 1e-15);
  EXPECT_NEAR(compute_reward(0, 1.0, 0.0, 1.0, c).reward, -2.5, 1e-15);
  const double p = 113320.0 / 103500.0;
  const double r = compute_reward(113320.0, p, 0.0, p * p, c).reward;
  EXPECT_NEAR(r, -(0.5 * p + 2.0 * p * p), 1e-12);
  EXPECT_NEAR(r, -2.945, 1e-3);
}

TEST(ComputeReward, WeightsAreConfigurable) {
  RewardConfig c;
  c.w_power = 1.0;
  c.w_comfort = 0.0;
  c.w_peak = 0.0;
  EXPECT_DOUBLE_EQ(compute_reward(0, 0.7, 5.0, 1.0, c).reward, -0.7);
}

TEST(RewardConfig, ValidateRejectsBadValues) {
  RewardConfig c;
  c.p_max = 0.0;
  EXPECT_THROW(c.validate(), Error);
  c = {};
  c.comfort_low = 26.0;
  EXPECT_THROW(c.validate(), Error);
  c = {};
  c.w_peak = -1.0;
  EXPECT_THROW(c.validate(), Error);
}

// ---------------------------------------------------------------- observation

TEST(Observation, CaseStudyDedupsTo53) {
  auto env = case_env();
  const auto& spec = env.observation_spec();
  EXPECT_EQ(spec.raw_size, 64u);
  EXPECT_EQ(spec.dims.size(), 52u);
  EXPECT_EQ(spec.size(), 53u);
  EXPECT_EQ(env.observation_size(), 53u);
  for (std::size_t i = 0; i < 4; ++i) EXPECT_EQ(spec.dims[i].unit, 0u);
  for (std::size_t i = 4; i < spec.dims.size(); ++i) EXPECT_GE(spec.dims[i].output, 4u);
  for (const auto& d : spec.dims) {
    EXPECT_TRUE(std::isfinite(d.lower));
    EXPECT_TRUE(std::isfinite(d.upper));
    EXPECT_LT(d.lower, d.upper);
  }
}

TEST(Observation, NormalizationAndClamp) {
  EXPECT_EQ(normalize(23.0, 23.0, 25.0), 0.0);
  EXPECT_EQ(normalize(25.0, 23.0, 25.0), 1.0);
  EXPECT_EQ(normalize(31.0, 23.0, 25.0), 1.0);
  EXPECT_EQ(normalize(-4.0, 23.0, 25.0), 0.0);
  EXPECT_DOUBLE_EQ(normalize(24.0, 23.0, 25.0), 0.5);
}

TEST(Observation, NormalizationRoundTrips) {
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<int> k(0, 200);
  for (int i = 0; i < 1000; ++i) {
    const double x = 10.0 + 0.1 * k(rng) * 0.25;
    EXPECT_NEAR(denormalize(normalize(x, 10.0, 15.0), 10.0, 15.0), x, 0.1);
    EXPECT_NEAR(denormalize(normalize(x, 10.0, 15.0), 10.0, 15.0), x, 1e-12);
  }
}

TEST(Observation, AssembleChecksLengthAndAppendsHour) {
  auto env = case_env();
  const auto& spec = env.observation_spec();
  std::vector<double> raw(64, 1e9);
  const auto obs = assemble_observation(raw, spec, 13.5);
  ASSERT_EQ(obs.size(), 53u);
  for (std::size_t i = 0; i + 1 < obs.size(); ++i) EXPECT_EQ(obs[i], 1.0);
  EXPECT_DOUBLE_EQ(obs.back(), 13.5 / 24.0);
  raw.pop_back();
  EXPECT_THROW(assemble_observation(raw, spec, 0.0), ShapeError);
}

TEST(Observation, RetainedWeatherMatchesEveryUnit) {
  auto env = case_env();
  env.reset(1, env.hub().config().day_index("07-20"));
  const std::vector<double> zero(24, 0.0);
  for (int k = 0; k < 96; ++k) {
    const auto r = env.step(zero);
    std::size_t off = 0;
    for (const auto& slot : env.hub().units()) {
      for (std::size_t w = 0; w < 4; ++w) ASSERT_EQ(r.raw[off + w], r.raw[w]);
      off += slot.unit->metadata().output_count();
    }
    for (std::size_t w = 0; w < 4; ++w) {
      const auto& d = env.observation_spec().dims[w];
      ASSERT_EQ(r.observation[w], normalize(r.raw[w], d.lower, d.upper));
    }
  }
}

// ---------------------------------------------------------------- environment

TEST(ClusterEnv, CaseStudyDimensions) {
  auto env = case_env();
  EXPECT_EQ(env.observation_size(), 53u);
  EXPECT_EQ(env.action_size(), 24u);
  const auto obs = env.reset(0, 0);
  EXPECT_EQ(obs.size(), 53u);
}

TEST(ClusterEnv, ResetIsDeterministic) {
  auto env = case_env();
  const auto day = env.hub().config().day_index("07-20");
  const auto a = env.reset(11, day);
  const std::vector<double> act(24, 0.7);
  for (int k = 0; k < 30; ++k) env.step(act);
  const auto b = env.reset(11, day);
  EXPECT_EQ(a, b);
  EXPECT_EQ(env.steps_done(), 0u);
}

TEST(ClusterEnv, InitialMapperStateIsBaseline) {
  auto env = case_env();
  env.step(std::vector<double>(24, -1.0));
  env.reset(0, 0);
  const auto m = env.mapper_state();
  ASSERT_EQ(m.size(), 24u);
  int sat = 0, zone = 0;
  for (std::size_t i = 0; i < m.size(); ++i) {
    if (env.action_spec().dims[i].role == VariableRole::supply_air_setpoint) {
      EXPECT_EQ(m[i], 15.0);
      ++sat;
    } else {
      EXPECT_EQ(m[i], 25.0);
      ++zone;
    }
  }
  EXPECT_EQ(sat, 8);   // 1 + 1 + 3 + 3 air handlers
  EXPECT_EQ(zone, 16);  // 5 + 5 + 3 + 3 zones
}

TEST(ClusterEnv, DoneAtStep96AndNotBefore) {
  auto env = case_env();
  env.reset(0, 0);
  const std::vector<double> zero(24, 0.0);
  for (int k = 1; k <= 96; ++k) {
    const auto r = env.step(zero);
    ASSERT_EQ(r.done, k == 96) << k;
  }
  EXPECT_THROW(env.step(zero), Error);
}

TEST(ClusterEnv, ZeroRelativeActionKeepsSetpoints) {
  auto env = case_env();
  env.reset(0, 0);
  env.step(std::vector<double>(24, -0.6));
  const std::vector<double> before(env.mapper_state().begin(), env.mapper_state().end());
  env.step(std::vector<double>(24, 0.0));
  EXPECT_EQ(before, std::vector<double>(env.mapper_state().begin(), env.mapper_state().end()));
  env.step(std::vector<double>(24, 0.05));
  EXPECT_EQ(before, std::vector<double>(env.mapper_state().begin(), env.mapper_state().end()));
}

TEST(ClusterEnv, RewardIdentityAndMappingInvariantsEveryStep) {
  auto env = case_env();
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const auto& cfg = env.reward_config();
  for (std::size_t day : {0u, 12u}) {
    env.reset(0, day);
    while (!env.done()) {
      std::vector<double> a(24);
      for (auto& x : a) x = u(rng);
      const std::vector<double> prev(env.mapper_state().begin(), env.mapper_state().end());
      const auto r = env.step(a);
      const auto& b = r.info;
      EXPECT_NEAR(r.reward, -(b.weighted_power(cfg) + b.weighted_comfort(cfg) + b.weighted_peak(cfg)), 1e-12);
      EXPECT_EQ(r.reward, b.reward);
      const auto m = env.mapper_state();
      for (std::size_t i = 0; i < 24; ++i) {
        const auto& d = env.action_spec().dims[i];
        ASSERT_LE(std::abs(m[i] - prev[i]), 0.5 + 1e-12);
        ASSERT_GE(m[i], d.lower);
        ASSERT_LE(m[i], d.upper);
        ASSERT_TRUE(on_grid(m[i], 0.1));
      }
      for (double o : r.observation) {
        ASSERT_GE(o, 0.0);
        ASSERT_LE(o, 1.0);
      }
    }
  }
}

TEST(ClusterEnv, PowerInInfoSumsCoilsAndFans) {
  auto env = case_env();
  env.reset(0, env.hub().config().day_index("07-20"));
  for (int k = 0; k < 60; ++k) {
    const auto r = env.step(std::vector<double>(24, 0.0));
    double total = 0.0;
    std::size_t off = 0;
    for (const auto& slot : env.hub().units()) {
      const auto outs = slot.unit->metadata().outputs();
      for (std::size_t i = 0; i < outs.size(); ++i)
        if (outs[i]->role == VariableRole::coil_power || outs[i]->role == VariableRole::fan_power)
          total += r.raw[off + i];
      off += outs.size();
    }
    EXPECT_NEAR(r.info.power, total, 1e-9);
  }
}

TEST(ClusterEnv, HourFeatureIsContinuous) {
  auto env = case_env();
  auto obs = env.reset(0, 0);
  EXPECT_EQ(obs.back(), 0.0);
  for (int k = 1; k <= 10; ++k) obs = env.step(std::vector<double>(24, 0.0)).observation;
  EXPECT_DOUBLE_EQ(obs.back(), 2.5 / 24.0);
}

TEST(ClusterEnv, AbsoluteMappingSetsPhysicalValues) {
  auto env = case_env(ActionMapping::absolute);
  env.reset(0, 0);
  std::vector<double> a(24, 0.0);
  env.step(a);
  for (std::size_t i = 0; i < 24; ++i) {
    const auto& d = env.action_spec().dims[i];
    EXPECT_DOUBLE_EQ(env.mapper_state()[i], map_action_absolute(0.0, d.lower, d.upper, d.granularity));
  }
}

TEST(ClusterEnv, MultiDiscreteBins) {
  auto env = case_env(ActionMapping::absolute, ActionMode::multidiscrete);
  const auto bins = env.action_spec().bin_counts();
  ASSERT_EQ(bins.size(), 24u);
  for (std::size_t i = 0; i < 24; ++i)
    EXPECT_EQ(bins[i], env.action_spec().dims[i].role == VariableRole::supply_air_setpoint ? 51 : 21);
  env.reset(0, 0);
  std::vector<long> pick(24, 0);
  EXPECT_THROW(env.step(std::vector<double>(24, 0.0)), Error);
  env.step_discrete(pick);
  for (std::size_t i = 0; i < 24; ++i) EXPECT_EQ(env.mapper_state()[i], env.action_spec().dims[i].lower);
  pick[0] = 51;
  EXPECT_THROW(env.step_discrete(pick), RangeError);
}

TEST(ClusterEnv, ActionShapeAndFinitenessChecked) {
  auto env = case_env();
  env.reset(0, 0);
  EXPECT_THROW(env.step(std::vector<double>(23, 0.0)), ShapeError);
  std::vector<double> a(24, 0.0);
  a[3] = std::nan("");
  EXPECT_THROW(env.step(a), RangeError);
}

TEST(ClusterEnv, RecordsRewardRows) {
  auto env = case_env();
  env.reset(0, 0);
  while (!env.done()) env.step(std::vector<double>(24, 0.2));
  const auto& rec = env.hub().record();
  ASSERT_EQ(rec.rewards.size(), 96u);
  EXPECT_DOUBLE_EQ(rec.rewards[32].hour, 8.0);
}
