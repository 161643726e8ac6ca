#pragma once

// Reference office buildings implementing the co-simulation unit contract.
// A building is a set of RC zones served by one or more VAV air-handling
// units. The small office has one AHU for five zones; the medium office has
// one AHU per floor.

#include <cmath>
#include <memory>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "clusterflex/thermal.hpp"
#include "clusterflex/unit_contract.hpp"
#include "clusterflex/weather.hpp"

namespace clusterflex {

inline constexpr double kSupplyAirMin = 10.0;
inline constexpr double kSupplyAirMax = 15.0;
inline constexpr double kZoneSetpointMin = 23.0;
inline constexpr double kZoneSetpointMax = 25.0;
inline constexpr double kSetpointGranularity = 0.1;

struct BuildingLayout {
  std::string unit_type;
  std::string zone_label;  // "Zone" or "Floor"
  std::vector<ZoneParams> zones;
  std::vector<VavParams> ahus;
  std::vector<std::size_t> zone_ahu;  // AHU serving each zone
  OccupancySchedule schedule;
  double hvac_start_hour = 6.0;
  double hvac_stop_hour = 18.0;
  bool hvac_available = true;  // false leaves every zone free-floating
  double initial_temperature = 25.0;
  double default_step = 900.0;

  void validate() const {
    if (zones.empty()) throw RangeError(unit_type + ": no zones");
    if (ahus.empty()) throw RangeError(unit_type + ": no air-handling units");
    if (zone_ahu.size() != zones.size()) throw ShapeError(unit_type + ": zone_ahu size mismatch");
    for (std::size_t z = 0; z < zones.size(); ++z) {
      zones[z].validate(unit_type + " " + zone_label + " " + std::to_string(z + 1));
      if (zone_ahu[z] >= ahus.size()) throw RangeError(unit_type + ": zone mapped to missing AHU");
    }
    for (std::size_t a = 0; a < ahus.size(); ++a) ahus[a].validate(unit_type + " AHU " + std::to_string(a + 1));
    schedule.validate();
    if (!(hvac_start_hour >= 0.0 && hvac_start_hour < hvac_stop_hour && hvac_stop_hour <= 24.0))
      throw RangeError(unit_type + ": invalid HVAC availability window");
    if (!(default_step > 0.0)) throw RangeError(unit_type + ": default_step must be positive");
  }
};

// Rough design cooling load used to split AHU flow between terminals.
inline double design_load(const ZoneParams& z) {
  return 12.0 / z.envelope_resistance + z.max_occupants * z.gain_per_person + z.equipment_gain +
         600.0 * z.solar_aperture;
}

class OfficeBuilding final : public CoSimUnit {
 public:
  OfficeBuilding(BuildingLayout layout, std::shared_ptr<const WeatherSeries> weather)
      : layout_(std::move(layout)), weather_(std::move(weather)) {
    layout_.validate();
    if (!weather_) throw Error(layout_.unit_type + ": missing weather");
    compute_flow_shares();
    build_metadata();
    initialize(0.0);
  }

  const UnitMetadata& metadata() const override { return meta_; }
  const BuildingLayout& layout() const { return layout_; }

  void initialize(double start_time) override {
    time_ = start_time;
    temps_.assign(layout_.zones.size(), layout_.initial_temperature);
    sat_.assign(layout_.ahus.size(), kSupplyAirMax);
    applied_sat_ = sat_;
    setpoints_.assign(layout_.zones.size(), kZoneSetpointMax);
    coil_.assign(layout_.ahus.size(), 0.0);
    fan_.assign(layout_.ahus.size(), 0.0);
    flow_.assign(layout_.ahus.size(), 0.0);
    damper_.assign(layout_.zones.size(), 0.0);
    occupant_gains_.assign(layout_.zones.size(), 0.0);
  }

  void set_inputs(std::span<const double> values) override {
    if (values.size() != meta_.input_count())
      throw ShapeError(layout_.unit_type + ": expected " + std::to_string(meta_.input_count()) +
                       " inputs, got " + std::to_string(values.size()));
    const auto inputs = meta_.inputs();
    for (std::size_t i = 0; i < values.size(); ++i) {
      if (!std::isfinite(values[i])) throw RangeError(layout_.unit_type + ": non-finite input");
      const double v = inputs[i]->clamp(values[i]);
      if (i < sat_.size())
        sat_[i] = v;
      else
        setpoints_[i - sat_.size()] = v;
    }
  }

  void do_step(double dt) override {
    const double hour = std::fmod(time_, 86400.0) / 3600.0;
    const WeatherSample w = weather_->at(time_);
    const bool hvac_on =
        layout_.hvac_available && hour >= layout_.hvac_start_hour - 1e-9 && hour < layout_.hvac_stop_hour - 1e-9;
    const double occupancy = layout_.schedule.at_hour(hour);

    const std::size_t nz = layout_.zones.size();
    const std::size_t na = layout_.ahus.size();
    std::vector<double> gains(nz);
    for (std::size_t z = 0; z < nz; ++z) {
      const auto g = zone_gains(layout_.zones[z], occupancy, w.direct_solar);
      gains[z] = g.total();
      occupant_gains_[z] = g.occupants;
    }

    std::vector<double> coil(na, 0.0), fan(na, 0.0), flow(na, 0.0), damper(nz, 0.0);
    int substeps = 0;
    auto cooling = [&](std::span<const double> temps) {
      std::vector<double> q(nz, 0.0);
      ++substeps;
      if (!hvac_on) return q;
      for (std::size_t a = 0; a < na; ++a) {
        std::vector<VavZoneDemand> demand;
        std::vector<std::size_t> members;
        for (std::size_t z = 0; z < nz; ++z) {
          if (layout_.zone_ahu[z] != a) continue;
          const auto& p = layout_.zones[z];
          const double net_gain = (w.dry_bulb - temps[z]) / p.envelope_resistance + gains[z];
          demand.push_back({temps[z], setpoints_[z], thermostat_gain(p), net_gain, flow_share_[z]});
          members.push_back(z);
        }
        const auto r = compute_ahu(demand, sat_[a], w.dry_bulb, layout_.ahus[a]);
        coil[a] += r.coil_power;
        fan[a] += r.fan_power;
        flow[a] += r.mass_flow;
        for (std::size_t m = 0; m < members.size(); ++m) {
          q[members[m]] = r.zone_cooling[m];
          damper[members[m]] += r.zone_flow_fractions[m];
        }
      }
      return q;
    };

    auto result = step_zone_thermal(temps_, layout_.zones, gains, w.dry_bulb, dt, cooling);
    temps_ = std::move(result.temperatures);
    const double inv = 1.0 / substeps;
    for (std::size_t a = 0; a < na; ++a) {
      coil_[a] = coil[a] * inv;
      fan_[a] = fan[a] * inv;
      flow_[a] = flow[a] * inv;
    }
    for (std::size_t z = 0; z < nz; ++z) damper_[z] = damper[z] * inv;
    applied_sat_ = sat_;
    time_ += dt;
  }

  std::vector<double> get_outputs() const override {
    const WeatherSample w = weather_->at(time_);
    std::vector<double> out{w.dry_bulb, w.relative_humidity, w.wind_speed, w.direct_solar};
    out.insert(out.end(), coil_.begin(), coil_.end());
    out.insert(out.end(), fan_.begin(), fan_.end());
    out.insert(out.end(), applied_sat_.begin(), applied_sat_.end());
    out.insert(out.end(), flow_.begin(), flow_.end());
    out.insert(out.end(), temps_.begin(), temps_.end());
    return out;
  }

  double time() const override { return time_; }

  std::vector<std::pair<std::string, double>> diagnostics() const override {
    std::vector<std::pair<std::string, double>> d;
    for (std::size_t z = 0; z < damper_.size(); ++z)
      d.emplace_back(zone_name(z) + " Damper Position", damper_[z]);
    for (std::size_t z = 0; z < occupant_gains_.size(); ++z)
      d.emplace_back(zone_name(z) + " Occupant Heat Gain", occupant_gains_[z]);
    return d;
  }

  std::unique_ptr<CoSimUnit> clone() const override { return std::make_unique<OfficeBuilding>(*this); }

  std::span<const double> zone_temperatures() const { return temps_; }
  std::span<const double> flow_shares() const { return flow_share_; }

 private:
  std::string zone_name(std::size_t z) const { return layout_.zone_label + " " + std::to_string(z + 1); }

  std::string ahu_prefix(std::size_t a) const {
    return layout_.ahus.size() == 1 ? std::string() : layout_.zone_label + " " + std::to_string(a + 1) + " ";
  }

  void compute_flow_shares() {
    flow_share_.assign(layout_.zones.size(), 0.0);
    for (std::size_t a = 0; a < layout_.ahus.size(); ++a) {
      double total = 0.0;
      for (std::size_t z = 0; z < layout_.zones.size(); ++z)
        if (layout_.zone_ahu[z] == a) total += design_load(layout_.zones[z]);
      for (std::size_t z = 0; z < layout_.zones.size(); ++z)
        if (layout_.zone_ahu[z] == a) flow_share_[z] = design_load(layout_.zones[z]) / total;
    }
  }

  void build_metadata() {
    meta_.unit_type = layout_.unit_type;
    meta_.default_step = layout_.default_step;
    auto& v = meta_.variables;
    const auto in = Causality::input;
    const auto out = Causality::output;
    for (std::size_t a = 0; a < layout_.ahus.size(); ++a)
      v.push_back({ahu_prefix(a) + "AHU Supply Air Temperature", in, VariableRole::supply_air_setpoint, "degC",
                   kSupplyAirMin, kSupplyAirMax, kSetpointGranularity});
    for (std::size_t z = 0; z < layout_.zones.size(); ++z)
      v.push_back({zone_name(z) + " Cooling Setpoint", in, VariableRole::zone_setpoint, "degC", kZoneSetpointMin,
                   kZoneSetpointMax, kSetpointGranularity});

    v.push_back({"Site Outdoor Air Dry-bulb Temperature", out, VariableRole::outdoor_dry_bulb, "degC", 20.0, 40.0, 0});
    v.push_back({"Site Outdoor Air Relative Humidity", out, VariableRole::outdoor_humidity, "%", 0.0, 100.0, 0});
    v.push_back({"Site Wind Speed", out, VariableRole::wind_speed, "m/s", 0.0, 10.0, 0});
    v.push_back({"Site Direct Solar Radiation Rate per Area", out, VariableRole::direct_solar, "W/m2", 0.0, 1000.0, 0});
    for (std::size_t a = 0; a < layout_.ahus.size(); ++a) {
      const auto& ahu = layout_.ahus[a];
      const double coil_max = ahu.nominal_flow * ahu.air_cp * 20.0 / ahu.coil_cop;
      v.push_back({ahu_prefix(a) + "Cooling Coil Electric Power", out, VariableRole::coil_power, "W", 0.0, coil_max, 0});
    }
    for (std::size_t a = 0; a < layout_.ahus.size(); ++a)
      v.push_back({ahu_prefix(a) + "Fan Electric Power", out, VariableRole::fan_power, "W", 0.0,
                   layout_.ahus[a].fan_nominal_power, 0});
    for (std::size_t a = 0; a < layout_.ahus.size(); ++a)
      v.push_back({ahu_prefix(a) + "Supply Air Temperature", out, VariableRole::supply_air_temperature, "degC",
                   kSupplyAirMin, kSupplyAirMax, 0});
    for (std::size_t a = 0; a < layout_.ahus.size(); ++a)
      v.push_back({ahu_prefix(a) + "Supply Air Mass Flow Rate", out, VariableRole::supply_air_flow, "kg/s", 0.0,
                   layout_.ahus[a].nominal_flow, 0});
    for (std::size_t z = 0; z < layout_.zones.size(); ++z)
      v.push_back({zone_name(z) + " Indoor Air Temperature", out, VariableRole::zone_temperature, "degC", 20.0, 30.0, 0});
  }

  BuildingLayout layout_;
  std::shared_ptr<const WeatherSeries> weather_;
  UnitMetadata meta_;
  std::vector<double> flow_share_;

  double time_ = 0.0;
  std::vector<double> temps_, sat_, applied_sat_, setpoints_;
  std::vector<double> coil_, fan_, flow_, damper_, occupant_gains_;
};

// Default parameter sets. RC values are effective single-node values for the
// zone air plus fast internal mass, with every RC time constant under 3.5 h; gains and VAV sizes put a four-building
// cluster near a 130 kW afternoon peak on a 37 degC day. The high outdoor-air
// fraction makes supply-air reset a real lever on coil and fan power.
inline std::vector<ZoneParams> default_small_office_zones() {
  //       C [J/K]   R [K/W]      aperture occupants W/person equipment
  return {
      {1.3e6, 1.0 / 110.0, 3.0, 5.0, 75.0, 1260.0},   // south perimeter
      {0.85e6, 1.0 / 70.0, 3.5, 4.0, 75.0, 770.0},    // east perimeter
      {1.3e6, 1.0 / 110.0, 1.5, 6.0, 75.0, 1260.0},   // north perimeter
      {0.85e6, 1.0 / 70.0, 4.5, 4.0, 75.0, 770.0},    // west perimeter
      {1.5e6, 1.0 / 120.0, 1.0, 12.0, 75.0, 1680.0},   // core
  };
}

inline VavParams default_small_office_vav() { return {2.2, 0.3, 2500.0, 3.0, 0.45, kAirCp}; }

inline std::vector<ZoneParams> default_medium_office_floors() {
  return {
      {8.0e6, 1.0 / 650.0, 4.0, 80.0, 75.0, 8400.0},   // ground floor, shaded
      {8.0e6, 1.0 / 650.0, 12.0, 90.0, 75.0, 9800.0},  // middle floor
      {8.0e6, 1.0 / 900.0, 14.0, 85.0, 75.0, 9800.0},  // top floor, roof
  };
}

inline VavParams default_medium_office_vav() { return {3.4, 0.3, 5000.0, 3.2, 0.45, kAirCp}; }

inline WeatherSeries single_day_series(const WeatherDay& day) {
  return WeatherSeries({day}, 86400.0 / static_cast<double>(day.steps()));
}

inline BuildingLayout small_office_layout(std::vector<ZoneParams> zones, VavParams vav, OccupancySchedule schedule) {
  if (zones.size() != 5) throw ShapeError("small office needs exactly 5 zones");
  BuildingLayout l;
  l.unit_type = "small_office";
  l.zone_label = "Zone";
  l.zones = std::move(zones);
  l.ahus = {vav};
  l.zone_ahu.assign(5, 0);
  l.schedule = schedule;
  return l;
}

inline BuildingLayout medium_office_layout(std::vector<ZoneParams> floors, std::vector<VavParams> vavs,
                                           OccupancySchedule schedule) {
  if (floors.size() != 3) throw ShapeError("medium office needs exactly 3 floors");
  if (vavs.size() != 3) throw ShapeError("medium office needs exactly 3 VAV systems");
  BuildingLayout l;
  l.unit_type = "medium_office";
  l.zone_label = "Floor";
  l.zones = std::move(floors);
  l.ahus = std::move(vavs);
  l.zone_ahu = {0, 1, 2};
  l.schedule = schedule;
  return l;
}

inline std::unique_ptr<OfficeBuilding> make_small_office(std::vector<ZoneParams> zones, VavParams vav,
                                                         OccupancySchedule schedule,
                                                         std::shared_ptr<const WeatherSeries> weather) {
  return std::make_unique<OfficeBuilding>(small_office_layout(std::move(zones), vav, schedule), std::move(weather));
}

inline std::unique_ptr<OfficeBuilding> make_small_office(std::vector<ZoneParams> zones, VavParams vav,
                                                         OccupancySchedule schedule, const WeatherDay& weather) {
  return make_small_office(std::move(zones), vav, schedule,
                           std::make_shared<const WeatherSeries>(single_day_series(weather)));
}

inline std::unique_ptr<OfficeBuilding> make_medium_office(std::vector<ZoneParams> floors, std::vector<VavParams> vavs,
                                                          OccupancySchedule schedule,
                                                          std::shared_ptr<const WeatherSeries> weather) {
  return std::make_unique<OfficeBuilding>(medium_office_layout(std::move(floors), std::move(vavs), schedule),
                                          std::move(weather));
}

inline std::unique_ptr<OfficeBuilding> make_medium_office(std::vector<ZoneParams> floors, std::vector<VavParams> vavs,
                                                          OccupancySchedule schedule, const WeatherDay& weather) {
  return make_medium_office(std::move(floors), std::move(vavs), schedule,
                            std::make_shared<const WeatherSeries>(single_day_series(weather)));
}

}  // namespace clusterflex
