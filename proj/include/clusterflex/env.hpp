#pragma once

// Gym-style environment over the hub: observation assembly with weather
// de-duplication and [0, 1] scaling, Box / MultiDiscrete action spaces with
// absolute or relative-incremental mapping, and the cluster reward.

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "clusterflex/hub.hpp"
#include "clusterflex/reward.hpp"

namespace clusterflex {

// ---------------------------------------------------------------- mapping

// Decimal-friendly quantization: for granularity 0.1 the result is n / 10,
// the correctly rounded double of the decimal value.
inline double quantize(double value, double granularity) {
  const double inv = 1.0 / granularity;
  const double inv_rounded = std::round(inv);
  const double n = std::round(value / granularity);
  if (std::abs(inv - inv_rounded) < 1e-9) return n / inv_rounded;
  return n * granularity;
}

// Half-away-from-zero rounding of the scaled action: a step count in
// [-max_steps, max_steps].
inline long relative_step_count(double a, long max_steps) {
  const double clipped = std::clamp(a, -1.0, 1.0);
  return static_cast<long>(std::round(static_cast<double>(max_steps) * clipped));
}

inline double relative_delta(double a, double granularity = 0.1, double max_delta = 0.5) {
  const long max_steps = std::lround(max_delta / granularity);
  return quantize(static_cast<double>(relative_step_count(a, max_steps)) * granularity, granularity);
}

inline double map_action_relative(double a, double previous, double lower, double upper, double granularity = 0.1,
                                  double max_delta = 0.5) {
  const double next = std::clamp(previous + relative_delta(a, granularity, max_delta), lower, upper);
  return std::clamp(quantize(next, granularity), lower, upper);
}

inline double map_action_absolute(double a, double lower, double upper, double granularity) {
  const double clipped = std::clamp(a, -1.0, 1.0);
  const double value = lower + (clipped + 1.0) * 0.5 * (upper - lower);
  return std::clamp(quantize(value, granularity), lower, upper);
}

inline long discrete_bin_count(double lower, double upper, double granularity) {
  return std::lround((upper - lower) / granularity) + 1;
}

inline double map_action_discrete(long bin, double lower, double upper, double granularity) {
  const long bins = discrete_bin_count(lower, upper, granularity);
  if (bin < 0 || bin >= bins)
    throw RangeError("bin " + std::to_string(bin) + " outside [0, " + std::to_string(bins - 1) + "]");
  return quantize(lower + static_cast<double>(bin) * granularity, granularity);
}

// ---------------------------------------------------------------- spaces

enum class ActionMode { box, multidiscrete };
enum class ActionMapping { absolute, relative_incremental };

inline ActionMode parse_action_mode(const std::string& s, const std::string& path) {
  if (s == "box") return ActionMode::box;
  if (s == "multidiscrete") return ActionMode::multidiscrete;
  throw ConfigError(path, "unknown action mode '" + s + "' (expected box or multidiscrete)");
}

inline ActionMapping parse_action_mapping(const std::string& s, const std::string& path) {
  if (s == "absolute") return ActionMapping::absolute;
  if (s == "relative" || s == "relative_incremental") return ActionMapping::relative_incremental;
  throw ConfigError(path, "unknown action mapping '" + s + "' (expected absolute or relative)");
}

struct ObservationDim {
  std::size_t unit = 0;
  std::size_t output = 0;  // index among the unit's outputs
  std::size_t raw = 0;     // position in the concatenated raw vector
  double lower = 0.0;
  double upper = 1.0;
  std::string name;
};

struct ObservationSpec {
  std::vector<ObservationDim> dims;
  std::size_t raw_size = 0;
  bool hour_feature = true;

  std::size_t size() const { return dims.size() + (hour_feature ? 1 : 0); }
};

struct ActionDim {
  std::size_t unit = 0;
  std::size_t input = 0;
  double lower = 0.0;
  double upper = 1.0;
  double granularity = 0.1;
  VariableRole role = VariableRole::zone_setpoint;
  double reset_value = 0.0;
  std::string name;
};

struct ActionSpec {
  ActionMode mode = ActionMode::box;
  ActionMapping mapping = ActionMapping::relative_incremental;
  double max_delta = 0.5;  // relative mapping, per step
  std::vector<ActionDim> dims;

  std::size_t size() const { return dims.size(); }

  std::vector<long> bin_counts() const {
    std::vector<long> out;
    for (const auto& d : dims) out.push_back(discrete_bin_count(d.lower, d.upper, d.granularity));
    return out;
  }
};

// Weather outputs are kept from the first unit only.
inline ObservationSpec build_observation_spec(const std::vector<UnitSlot>& units, bool hour_feature = true) {
  ObservationSpec spec;
  spec.hour_feature = hour_feature;
  std::size_t raw = 0;
  for (std::size_t u = 0; u < units.size(); ++u) {
    const auto outputs = units[u].unit->metadata().outputs();
    for (std::size_t k = 0; k < outputs.size(); ++k, ++raw) {
      const auto* v = outputs[k];
      if (u > 0 && is_weather_role(v->role)) continue;
      if (!std::isfinite(v->lower_bound) || !std::isfinite(v->upper_bound))
        throw RangeError("observation bound of " + v->name + " is not finite");
      spec.dims.push_back({u, k, raw, v->lower_bound, v->upper_bound, units[u].index + "." + v->name});
    }
  }
  spec.raw_size = raw;
  return spec;
}

inline ActionSpec build_action_spec(const std::vector<UnitSlot>& units, ActionMode mode, ActionMapping mapping,
                                    double reset_sat = 15.0, double reset_zone = 25.0) {
  ActionSpec spec;
  spec.mode = mode;
  spec.mapping = mapping;
  for (std::size_t u = 0; u < units.size(); ++u) {
    const auto inputs = units[u].unit->metadata().inputs();
    for (std::size_t k = 0; k < inputs.size(); ++k) {
      const auto* v = inputs[k];
      const double reset = v->role == VariableRole::supply_air_setpoint ? reset_sat : reset_zone;
      if (reset < v->lower_bound || reset > v->upper_bound)
        throw RangeError("reset value for " + v->name + " outside its bounds");
      spec.dims.push_back({u, k, v->lower_bound, v->upper_bound, v->granularity, v->role, reset,
                           units[u].index + "." + v->name});
    }
  }
  return spec;
}

inline double normalize(double value, double lower, double upper) {
  return std::clamp((value - lower) / (upper - lower), 0.0, 1.0);
}

inline double denormalize(double x, double lower, double upper) { return lower + x * (upper - lower); }

inline std::vector<double> assemble_observation(std::span<const double> raw, const ObservationSpec& spec,
                                                double hour) {
  if (raw.size() != spec.raw_size)
    throw ShapeError("raw observation has " + std::to_string(raw.size()) + " values, expected " +
                     std::to_string(spec.raw_size));
  std::vector<double> obs;
  obs.reserve(spec.size());
  for (const auto& d : spec.dims) obs.push_back(normalize(raw[d.raw], d.lower, d.upper));
  if (spec.hour_feature) obs.push_back(std::clamp(hour / 24.0, 0.0, 1.0));
  return obs;
}

// ---------------------------------------------------------------- env

struct EnvOptions {
  RewardConfig reward;
  ActionMode mode = ActionMode::box;
  ActionMapping mapping = ActionMapping::relative_incremental;
  double reset_sat = 15.0;
  double reset_zone = 25.0;
};

struct StepResult {
  std::vector<double> observation;
  double reward = 0.0;
  bool done = false;
  RewardBreakdown info;
  std::vector<double> raw;  // physical outputs, unit-major
};

class ClusterEnv {
 public:
  ClusterEnv(HubConfig config, EnvOptions options) : hub_(std::move(config)), options_(options) {
    options_.reward.validate();
    obs_spec_ = build_observation_spec(hub_.units());
    act_spec_ = build_action_spec(hub_.units(), options_.mode, options_.mapping, options_.reset_sat,
                                  options_.reset_zone);
    for (const auto& slot : hub_.units()) {
      UnitRoles r;
      const auto outputs = slot.unit->metadata().outputs();
      for (std::size_t k = 0; k < outputs.size(); ++k) {
        if (outputs[k]->role == VariableRole::coil_power) r.coil.push_back(k);
        if (outputs[k]->role == VariableRole::fan_power) r.fan.push_back(k);
        if (outputs[k]->role == VariableRole::zone_temperature) r.zone.push_back(k);
      }
      roles_.push_back(r);
    }
    hub_.record().reward_config = options_.reward;
    for (const auto& d : act_spec_.dims) mapper_.push_back(d.reset_value);
    raw_ = hub_.collect();
  }

  const ObservationSpec& observation_spec() const { return obs_spec_; }
  const ActionSpec& action_spec() const { return act_spec_; }
  std::size_t observation_size() const { return obs_spec_.size(); }
  std::size_t action_size() const { return act_spec_.size(); }
  const RewardConfig& reward_config() const { return options_.reward; }
  void set_p_max(double p_max) {
    options_.reward.p_max = p_max;
    options_.reward.validate();
    hub_.record().reward_config = options_.reward;
  }

  Hub& hub() { return hub_; }
  const Hub& hub() const { return hub_; }
  std::size_t day() const { return day_; }
  std::size_t steps_done() const { return hub_.steps_done(); }
  bool done() const { return hub_.finished(); }
  std::span<const double> mapper_state() const { return mapper_; }

  // The seed is kept for the Gym contract; the reference units are
  // deterministic and ignore it.
  std::vector<double> reset(std::uint64_t seed, std::size_t day_index, std::size_t days = 1) {
    seed_ = seed;
    day_ = day_index;
    hub_.reset(day_index, days);
    mapper_.clear();
    for (const auto& d : act_spec_.dims) mapper_.push_back(d.reset_value);
    raw_ = hub_.collect();
    return observe();
  }

  // Box action in [-1, 1]^n.
  StepResult step(std::span<const double> action) {
    if (action.size() != act_spec_.size())
      throw ShapeError("action has " + std::to_string(action.size()) + " dims, expected " +
                       std::to_string(act_spec_.size()));
    if (act_spec_.mode != ActionMode::box) throw Error("environment expects MultiDiscrete actions");
    for (std::size_t i = 0; i < action.size(); ++i) {
      if (!std::isfinite(action[i])) throw RangeError("non-finite action");
      const auto& d = act_spec_.dims[i];
      if (act_spec_.mapping == ActionMapping::relative_incremental)
        mapper_[i] = map_action_relative(action[i], mapper_[i], d.lower, d.upper, d.granularity, act_spec_.max_delta);
      else
        mapper_[i] = map_action_absolute(action[i], d.lower, d.upper, d.granularity);
    }
    return advance();
  }

  StepResult step_discrete(std::span<const long> bins) {
    if (bins.size() != act_spec_.size())
      throw ShapeError("action has " + std::to_string(bins.size()) + " dims, expected " +
                       std::to_string(act_spec_.size()));
    if (act_spec_.mode != ActionMode::multidiscrete) throw Error("environment expects Box actions");
    for (std::size_t i = 0; i < bins.size(); ++i) {
      const auto& d = act_spec_.dims[i];
      mapper_[i] = map_action_discrete(bins[i], d.lower, d.upper, d.granularity);
    }
    return advance();
  }

  // Physical setpoints straight to the hub, one list per unit. Used by the
  // rule-based controller.
  StepResult step_physical(const std::vector<std::vector<double>>& setpoints) {
    std::size_t i = 0;
    if (setpoints.size() != hub_.unit_count()) throw ShapeError("one setpoint list per unit is required");
    std::vector<double> flat;
    for (const auto& list : setpoints) flat.insert(flat.end(), list.begin(), list.end());
    if (flat.size() != act_spec_.size()) throw ShapeError("setpoint lists do not match the unit inputs");
    for (const auto& d : act_spec_.dims) {
      mapper_[i] = std::clamp(flat[i], d.lower, d.upper);
      ++i;
    }
    return advance();
  }

  // Mapper state split per unit, in physical units.
  std::vector<std::vector<double>> physical_actions() const {
    std::vector<std::vector<double>> out(hub_.unit_count());
    for (std::size_t i = 0; i < act_spec_.size(); ++i) out[act_spec_.dims[i].unit].push_back(mapper_[i]);
    return out;
  }

 private:
  struct UnitRoles {
    std::vector<std::size_t> coil, fan, zone;
  };

  std::vector<double> observe() const {
    return assemble_observation(raw_, obs_spec_, hub_.axis().hour_of_day(hub_.steps_done()));
  }

  StepResult advance() {
    if (hub_.finished()) throw Error("episode is done; call reset before stepping again");
    const double hour = hub_.axis().hour_of_day(hub_.steps_done());
    hub_.apply(physical_actions());
    hub_.step();
    raw_ = hub_.collect();

    std::vector<double> coil, fan, zones;
    std::size_t offset = 0;
    for (std::size_t u = 0; u < hub_.unit_count(); ++u) {
      for (auto k : roles_[u].coil) coil.push_back(raw_[offset + k]);
      for (auto k : roles_[u].fan) fan.push_back(raw_[offset + k]);
      for (auto k : roles_[u].zone) zones.push_back(raw_[offset + k]);
      offset += hub_.units()[u].unit->metadata().output_count();
    }
    const auto b = evaluate_reward(coil, fan, zones, hour, options_.reward);
    hub_.log_reward(b, hour);

    StepResult r;
    r.observation = observe();
    r.reward = b.reward;
    r.done = hub_.finished();
    r.info = b;
    r.raw = raw_;
    return r;
  }

  Hub hub_;
  EnvOptions options_;
  ObservationSpec obs_spec_;
  ActionSpec act_spec_;
  std::vector<UnitRoles> roles_;
  std::vector<double> mapper_;
  std::vector<double> raw_;
  std::size_t day_ = 0;
  std::uint64_t seed_ = 0;
};

}  // namespace clusterflex
