#pragma once

// Single-node RC zone balance and VAV air-side model.
//
//   C dT/dt = (T_out - T) / R + Q_gains - Q_cool
//
// integrated with explicit Euler on sub-steps of at most 60 s.

#include <algorithm>
#include <array>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "clusterflex/error.hpp"

namespace clusterflex {

inline constexpr double kAirCp = 1005.0;            // J/(kg K)
inline constexpr double kMaxThermalSubstep = 60.0;  // s

struct ZoneParams {
  double heat_capacitance = 1.0;     // J/K
  double envelope_resistance = 1.0;  // K/W
  double solar_aperture = 1.0;       // m2, effective
  double max_occupants = 1.0;
  double gain_per_person = 75.0;     // W, sensible
  double equipment_gain = 0.0;       // W at full occupancy

  void validate(const std::string& where = "zone") const {
    if (!(heat_capacitance > 0.0)) throw RangeError(where + ": heat_capacitance must be positive");
    if (!(envelope_resistance > 0.0)) throw RangeError(where + ": envelope_resistance must be positive");
    if (!(solar_aperture > 0.0)) throw RangeError(where + ": solar_aperture must be positive");
    if (!(max_occupants > 0.0)) throw RangeError(where + ": max_occupants must be positive");
    if (!(gain_per_person > 0.0)) throw RangeError(where + ": gain_per_person must be positive");
    if (!(equipment_gain >= 0.0)) throw RangeError(where + ": equipment_gain must be non-negative");
  }
};

struct VavParams {
  double nominal_flow = 1.0;          // kg/s
  double min_flow_fraction = 0.3;
  double fan_nominal_power = 1000.0;  // W
  double coil_cop = 3.0;
  double outdoor_air_fraction = 0.2;
  double air_cp = kAirCp;

  void validate(const std::string& where = "vav") const {
    if (!(nominal_flow > 0.0)) throw RangeError(where + ": nominal_flow must be positive");
    if (!(min_flow_fraction > 0.0 && min_flow_fraction < 1.0))
      throw RangeError(where + ": min_flow_fraction must lie in (0, 1)");
    if (!(fan_nominal_power > 0.0)) throw RangeError(where + ": fan_nominal_power must be positive");
    if (!(coil_cop > 1.0)) throw RangeError(where + ": coil_cop must exceed 1");
    if (!(outdoor_air_fraction >= 0.0 && outdoor_air_fraction <= 1.0))
      throw RangeError(where + ": outdoor_air_fraction must lie in [0, 1]");
    if (!(air_cp > 0.0)) throw RangeError(where + ": air_cp must be positive");
  }
};

struct OccupancySchedule {
  std::array<double, 24> fraction_by_hour{};

  double at_hour(double hour) const {
    auto h = static_cast<int>(std::floor(hour));
    h = ((h % 24) + 24) % 24;
    return fraction_by_hour[static_cast<std::size_t>(h)];
  }

  void validate() const {
    for (double f : fraction_by_hour)
      if (!(f >= 0.0 && f <= 1.0)) throw RangeError("occupancy fraction outside [0, 1]");
  }

  // 0.9 from 08:00 to 18:00.
  static OccupancySchedule constant_office() {
    OccupancySchedule s;
    for (int h = 8; h < 18; ++h) s.fraction_by_hour[static_cast<std::size_t>(h)] = 0.9;
    return s;
  }

  // As constant_office, dipping to 0.4 over the 12:00 hour.
  static OccupancySchedule lunch_dip_office() {
    auto s = constant_office();
    s.fraction_by_hour[12] = 0.4;
    return s;
  }
};

struct ZoneGains {
  double occupants = 0.0;
  double equipment = 0.0;
  double solar = 0.0;

  double total() const { return occupants + equipment + solar; }
};

// Equipment and lighting keep a 20 % base load when the zone is empty.
inline ZoneGains zone_gains(const ZoneParams& zone, double occupancy_fraction, double direct_solar) {
  ZoneGains g;
  g.occupants = occupancy_fraction * zone.max_occupants * zone.gain_per_person;
  g.equipment = zone.equipment_gain * (0.2 + 0.8 * occupancy_fraction);
  g.solar = zone.solar_aperture * std::max(0.0, direct_solar);
  return g;
}

inline double thermostat_gain(const ZoneParams& zone) { return zone.heat_capacitance / 900.0; }

// One zone served by an air-handling unit.
struct VavZoneDemand {
  double zone_temp = 0.0;    // degC
  double setpoint = 0.0;     // degC
  double gain = 0.0;         // W/K, proportional thermostat gain
  double feedforward = 0.0;  // W, load already known to be entering the zone
  double flow_share = 1.0;   // fraction of the AHU nominal flow this terminal can take
};

struct VavResult {
  double mass_flow = 0.0;          // kg/s
  double fan_power = 0.0;          // W
  double coil_power = 0.0;         // W
  double delivered_cooling = 0.0;  // W
  double flow_fraction = 0.0;      // mass_flow / nominal_flow
};

struct AhuResult {
  double mass_flow = 0.0;
  double fan_power = 0.0;
  double coil_power = 0.0;
  std::vector<double> zone_flows;
  std::vector<double> zone_cooling;  // W delivered to each zone
  std::vector<double> zone_flow_fractions;
};

// Terminal flow needed to meet the thermostat demand, clamped to the box
// limits. With sat >= zone_temp the box sits at minimum flow.
inline double vav_terminal_flow(const VavZoneDemand& zone, double sat, const VavParams& vav) {
  const double nominal = vav.nominal_flow * zone.flow_share;
  const double minimum = vav.min_flow_fraction * nominal;
  const double demanded = std::max(0.0, zone.feedforward + zone.gain * (zone.zone_temp - zone.setpoint));
  const double delta = zone.zone_temp - sat;
  if (!(delta > 0.0)) return minimum;
  return std::clamp(demanded / (vav.air_cp * delta), minimum, nominal);
}

inline AhuResult compute_ahu(std::span<const VavZoneDemand> zones, double sat, double t_out,
                             const VavParams& vav) {
  AhuResult r;
  r.zone_flows.reserve(zones.size());
  double return_enthalpy = 0.0;
  for (const auto& z : zones) {
    const double flow = vav_terminal_flow(z, sat, vav);
    r.zone_flows.push_back(flow);
    r.zone_cooling.push_back(flow * vav.air_cp * std::max(0.0, z.zone_temp - sat));
    r.zone_flow_fractions.push_back(flow / (vav.nominal_flow * z.flow_share));
    r.mass_flow += flow;
    return_enthalpy += flow * z.zone_temp;
  }
  if (r.mass_flow <= 0.0) return r;
  const double return_temp = return_enthalpy / r.mass_flow;
  const double mixed = vav.outdoor_air_fraction * t_out + (1.0 - vav.outdoor_air_fraction) * return_temp;
  const double ratio = r.mass_flow / vav.nominal_flow;
  r.fan_power = vav.fan_nominal_power * ratio * ratio * ratio;
  r.coil_power = r.mass_flow * vav.air_cp * std::max(0.0, mixed - sat) / vav.coil_cop;
  return r;
}

// Single-zone VAV system driven by a proportional thermostat. `feedforward`
// adds a known load to the demand; zero gives the plain proportional loop.
inline VavResult compute_vav(double zone_temp, double setpoint, double sat, double t_out,
                             const VavParams& vav, double gain, double feedforward = 0.0) {
  const VavZoneDemand zone{zone_temp, setpoint, gain, feedforward, 1.0};
  const auto ahu = compute_ahu(std::span(&zone, 1), sat, t_out, vav);
  return {ahu.mass_flow, ahu.fan_power, ahu.coil_power, ahu.zone_cooling.front(),
          ahu.zone_flow_fractions.front()};
}

struct ZoneStepResult {
  std::vector<double> temperatures;
  std::vector<double> mean_cooling;  // W, averaged over the step
};

// Cooling is re-evaluated every sub-step through `cooling(temps)`, which
// returns the delivered cooling per zone. Sub-steps are dt / ceil(dt / 60),
// so stepping 2*dt once is bit-identical to stepping dt twice whenever dt is
// a multiple of 60 s.
template <typename CoolingFn>
ZoneStepResult step_zone_thermal(std::span<const double> temperatures, std::span<const ZoneParams> zones,
                                 std::span<const double> gains, double t_out, double dt,
                                 CoolingFn&& cooling) {
  if (!(dt > 0.0)) throw RangeError("thermal step needs dt > 0");
  if (temperatures.size() != zones.size() || gains.size() != zones.size())
    throw ShapeError("zone state, parameters and gains differ in length");

  const auto substeps = static_cast<int>(std::ceil(dt / kMaxThermalSubstep - 1e-9));
  const double h = dt / substeps;

  ZoneStepResult out;
  out.temperatures.assign(temperatures.begin(), temperatures.end());
  out.mean_cooling.assign(zones.size(), 0.0);
  for (int s = 0; s < substeps; ++s) {
    const std::vector<double> q_cool = cooling(std::span<const double>(out.temperatures));
    for (std::size_t z = 0; z < zones.size(); ++z) {
      const auto& p = zones[z];
      const double flux = (t_out - out.temperatures[z]) / p.envelope_resistance + gains[z] - q_cool[z];
      out.temperatures[z] += h * flux / p.heat_capacitance;
      out.mean_cooling[z] += q_cool[z] / substeps;
    }
  }
  return out;
}

inline ZoneStepResult step_zone_thermal(std::span<const double> temperatures,
                                        std::span<const ZoneParams> zones, std::span<const double> gains,
                                        double t_out, double dt) {
  return step_zone_thermal(temperatures, zones, gains, t_out, dt,
                           [n = zones.size()](std::span<const double>) { return std::vector<double>(n, 0.0); });
}

// Fixed point of the free-floating balance.
inline double free_float_equilibrium(const ZoneParams& zone, double t_out, double gains) {
  return t_out + zone.envelope_resistance * gains;
}

}  // namespace clusterflex
