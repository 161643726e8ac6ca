#pragma once

// Rule-based baseline: fixed zone and supply-air setpoints at every step.

#include <string>
#include <vector>

#include "clusterflex/env.hpp"

namespace clusterflex {

struct RbcConfig {
  double zone_setpoint = 25.0;
  double sat_setpoint = 15.0;
};

// One physical setpoint list per unit, in declared input order.
inline std::vector<std::vector<double>> rbc_action(const ActionSpec& spec, const RbcConfig& config) {
  std::vector<std::vector<double>> out;
  for (const auto& d : spec.dims) {
    const bool sat = d.role == VariableRole::supply_air_setpoint;
    const double v = sat ? config.sat_setpoint : config.zone_setpoint;
    if (v < d.lower || v > d.upper)
      throw RangeError(std::string(sat ? "supply-air" : "zone") + " setpoint " + format_number(v) +
                       " outside [" + format_number(d.lower) + ", " + format_number(d.upper) + "] for " + d.name);
    if (out.size() <= d.unit) out.resize(d.unit + 1);
    out[d.unit].push_back(v);
  }
  return out;
}

struct EpisodeSummary {
  double total_reward = 0.0;
  double peak_power = 0.0;  // W
  double comfort_penalty = 0.0;
  std::size_t steps = 0;
  std::size_t violations = 0;  // steps with P_t >= P_max
  std::vector<double> power;   // W per step
};

inline void accumulate(EpisodeSummary& s, const StepResult& r, double p_max) {
  s.total_reward += r.reward;
  s.peak_power = std::max(s.peak_power, r.info.power);
  s.comfort_penalty += r.info.p_temp;
  s.violations += r.info.power >= p_max ? 1 : 0;
  s.power.push_back(r.info.power);
  ++s.steps;
}

// Full-day RBC rollout through the environment.
inline EpisodeSummary run_rbc_episode(ClusterEnv& env, const RbcConfig& config, std::size_t day_index,
                                      std::size_t days = 1) {
  const auto action = rbc_action(env.action_spec(), config);
  env.reset(0, day_index, days);
  EpisodeSummary s;
  while (!env.done()) accumulate(s, env.step_physical(action), env.reward_config().p_max);
  return s;
}

}  // namespace clusterflex
