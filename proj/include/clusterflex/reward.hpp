#pragma once

// Three-part cluster reward: HVAC power, thermal comfort and peak exceedance.
//
//   r = -(w_power * p_hvac + w_comfort * p_temp + w_peak * p_peak)

#include <cmath>
#include <span>

#include "clusterflex/error.hpp"

namespace clusterflex {

struct RewardConfig {
  double w_power = 0.5;
  double w_comfort = 1.0;
  double w_peak = 2.0;
  double p_max = 103500.0;  // W
  double comfort_low = 23.0;
  double comfort_high = 25.0;
  double occupied_start = 8.0;  // hour, inclusive
  double occupied_end = 18.0;   // hour, exclusive

  void validate() const {
    if (!(w_power >= 0.0 && w_comfort >= 0.0 && w_peak >= 0.0)) throw RangeError("reward weights must be non-negative");
    if (!(p_max > 0.0)) throw RangeError("p_max must be positive");
    if (!(comfort_low < comfort_high)) throw RangeError("comfort band must satisfy low < high");
    if (!(occupied_start < occupied_end)) throw RangeError("occupied window must satisfy start < end");
  }
};

struct RewardBreakdown {
  double power = 0.0;   // W, aggregate P_t
  double p_hvac = 0.0;
  double p_temp = 0.0;
  double p_peak = 0.0;
  double reward = 0.0;

  double weighted_power(const RewardConfig& c) const { return c.w_power * p_hvac; }
  double weighted_comfort(const RewardConfig& c) const { return c.w_comfort * p_temp; }
  double weighted_peak(const RewardConfig& c) const { return c.w_peak * p_peak; }
};

struct PowerPenalty {
  double total = 0.0;  // W
  double p_hvac = 0.0;
};

inline PowerPenalty power_penalty(std::span<const double> coil_powers, std::span<const double> fan_powers,
                                  double p_max) {
  if (!(p_max > 0.0)) throw RangeError("p_max must be positive");
  PowerPenalty out;
  for (double p : coil_powers) {
    if (p < 0.0 || !std::isfinite(p)) throw NumericError("negative or non-finite coil power");
    out.total += p;
  }
  for (double p : fan_powers) {
    if (p < 0.0 || !std::isfinite(p)) throw NumericError("negative or non-finite fan power");
    out.total += p;
  }
  out.p_hvac = out.total / p_max;
  return out;
}

inline bool is_occupied(double hour, double start, double end) { return hour >= start && hour < end; }

// Deviation below 1 K counts linearly, above 1 K it is squared.
inline double zone_comfort_penalty(double temperature, double low, double high) {
  double dev = 0.0;
  if (temperature > high) dev = temperature - high;
  else if (temperature < low) dev = low - temperature;
  return dev <= 1.0 ? dev : dev * dev;
}

inline double comfort_penalty(std::span<const double> zone_temps, double low, double high, double hour,
                              double occupied_start, double occupied_end) {
  if (!is_occupied(hour, occupied_start, occupied_end)) return 0.0;
  double total = 0.0;
  for (double t : zone_temps) total += zone_comfort_penalty(t, low, high);
  return total;
}

inline double comfort_penalty(std::span<const double> zone_temps, const RewardConfig& c, double hour) {
  return comfort_penalty(zone_temps, c.comfort_low, c.comfort_high, hour, c.occupied_start, c.occupied_end);
}

// Reaching the threshold already counts as a violation.
inline double peak_penalty(double power, double p_max, double p_hvac) {
  return power >= p_max ? p_hvac * p_hvac : -0.5;
}

inline RewardBreakdown compute_reward(double power, double p_hvac, double p_temp, double p_peak,
                                      const RewardConfig& c) {
  RewardBreakdown b{power, p_hvac, p_temp, p_peak, 0.0};
  b.reward = -(c.w_power * p_hvac + c.w_comfort * p_temp + c.w_peak * p_peak);
  return b;
}

inline RewardBreakdown evaluate_reward(std::span<const double> coil_powers, std::span<const double> fan_powers,
                                       std::span<const double> zone_temps, double hour, const RewardConfig& c) {
  const auto pw = power_penalty(coil_powers, fan_powers, c.p_max);
  const double temp = comfort_penalty(zone_temps, c, hour);
  const double peak = peak_penalty(pw.total, c.p_max, pw.p_hvac);
  return compute_reward(pw.total, pw.p_hvac, temp, peak, c);
}

}  // namespace clusterflex
