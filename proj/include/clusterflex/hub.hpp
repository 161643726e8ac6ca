#pragma once

// Communication hub: configuration, unified time axis, grouped I/O, unit
// index allocation, data storage and the synchronous master stepping loop.
// The hub only ever sees physical values.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <future>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "clusterflex/buildings.hpp"
#include "clusterflex/config_reader.hpp"
#include "clusterflex/format.hpp"
#include "clusterflex/reward.hpp"
#include "clusterflex/unit_contract.hpp"
#include "clusterflex/weather.hpp"

namespace clusterflex {

// ---------------------------------------------------------------- config

struct ZoneOverride {
  std::optional<double> heat_capacitance, envelope_resistance, solar_aperture, max_occupants, gain_per_person,
      equipment_gain;

  void apply(ZoneParams& z) const {
    if (heat_capacitance) z.heat_capacitance = *heat_capacitance;
    if (envelope_resistance) z.envelope_resistance = *envelope_resistance;
    if (solar_aperture) z.solar_aperture = *solar_aperture;
    if (max_occupants) z.max_occupants = *max_occupants;
    if (gain_per_person) z.gain_per_person = *gain_per_person;
    if (equipment_gain) z.equipment_gain = *equipment_gain;
  }
};

struct VavOverride {
  std::optional<double> nominal_flow, min_flow_fraction, fan_nominal_power, coil_cop, outdoor_air_fraction, air_cp;

  void apply(VavParams& v) const {
    if (nominal_flow) v.nominal_flow = *nominal_flow;
    if (min_flow_fraction) v.min_flow_fraction = *min_flow_fraction;
    if (fan_nominal_power) v.fan_nominal_power = *fan_nominal_power;
    if (coil_cop) v.coil_cop = *coil_cop;
    if (outdoor_air_fraction) v.outdoor_air_fraction = *outdoor_air_fraction;
    if (air_cp) v.air_cp = *air_cp;
  }
};

struct UnitEntry {
  std::string name;       // label used in logs, e.g. small_office_a
  std::string unit_type;  // small_office | medium_office
  int count = 1;
  OccupancySchedule schedule = OccupancySchedule::constant_office();
  std::vector<ZoneOverride> zones;  // empty or one per zone
  std::vector<VavOverride> vavs;    // empty, one shared, or one per AHU
  std::optional<double> initial_temperature;
};

struct SyntheticDaySpec {
  std::string date;
  double peak = 35.0;
  double min = 27.0;
  double peak_hour = 16.0;
};

struct WeatherConfig {
  std::vector<SyntheticDaySpec> synthetic;  // used when csv is empty
  std::string csv;                          // path, resolved against the config directory
  std::vector<std::string> csv_dates;       // one label per day in the csv
};

struct HubConfig {
  std::vector<UnitEntry> units;
  double step = 900.0;
  std::string start;  // date label; defaults to test_day
  int duration_days = 1;
  std::vector<std::string> training_days;
  std::string test_day;
  WeatherConfig weather;
  bool record = true;
  bool record_diagnostics = true;
  bool parallel_step = false;
  std::filesystem::path base_dir;  // directory of the config file

  std::size_t steps_per_day() const { return static_cast<std::size_t>(std::llround(86400.0 / step)); }

  std::vector<std::string> dates() const {
    if (!weather.csv.empty()) return weather.csv_dates;
    std::vector<std::string> out;
    for (const auto& d : weather.synthetic) out.push_back(d.date);
    return out;
  }

  std::size_t day_index(const std::string& date) const {
    const auto all = dates();
    const auto it = std::find(all.begin(), all.end(), date);
    if (it == all.end()) throw ConfigError("hub.weather", "no weather for day '" + date + "'");
    return static_cast<std::size_t>(it - all.begin());
  }
};

inline ZoneOverride parse_zone_override(JsonObject o) {
  ZoneOverride z;
  auto opt = [&](const char* key, std::optional<double>& dst) {
    if (o.has(key)) dst = o.require<double>(key);
  };
  opt("heat_capacitance", z.heat_capacitance);
  opt("envelope_resistance", z.envelope_resistance);
  opt("solar_aperture", z.solar_aperture);
  opt("max_occupants", z.max_occupants);
  opt("gain_per_person", z.gain_per_person);
  opt("equipment_gain", z.equipment_gain);
  o.finish();
  return z;
}

inline VavOverride parse_vav_override(JsonObject o) {
  VavOverride v;
  auto opt = [&](const char* key, std::optional<double>& dst) {
    if (o.has(key)) dst = o.require<double>(key);
  };
  opt("nominal_flow", v.nominal_flow);
  opt("min_flow_fraction", v.min_flow_fraction);
  opt("fan_nominal_power", v.fan_nominal_power);
  opt("coil_cop", v.coil_cop);
  opt("outdoor_air_fraction", v.outdoor_air_fraction);
  opt("air_cp", v.air_cp);
  o.finish();
  return v;
}

inline OccupancySchedule parse_schedule(const Json& j, const std::string& path) {
  if (j.is_string()) {
    const auto name = j.get<std::string>();
    if (name == "constant") return OccupancySchedule::constant_office();
    if (name == "lunch_dip") return OccupancySchedule::lunch_dip_office();
    throw ConfigError(path, "unknown schedule '" + name + "' (expected constant, lunch_dip or 24 fractions)");
  }
  const auto values = json_value<std::vector<double>>(j, path);
  if (values.size() != 24) throw ConfigError(path, "schedule needs 24 hourly fractions");
  OccupancySchedule s;
  std::copy(values.begin(), values.end(), s.fraction_by_hour.begin());
  try {
    s.validate();
  } catch (const Error& e) {
    throw ConfigError(path, e.what());
  }
  return s;
}

inline UnitEntry parse_unit_entry(JsonObject o) {
  UnitEntry u;
  u.unit_type = o.require<std::string>("type");
  if (u.unit_type != "small_office" && u.unit_type != "medium_office")
    throw ConfigError(o.path_of("type"), "unknown unit type '" + u.unit_type + "'");
  u.name = o.get<std::string>("name", u.unit_type);
  u.count = o.get<int>("count", 1);
  if (u.count < 1) throw ConfigError(o.path_of("count"), "count must be at least 1");
  if (o.has("schedule")) u.schedule = parse_schedule(o.raw("schedule"), o.path_of("schedule"));
  const std::size_t n_zones = u.unit_type == "small_office" ? 5 : 3;
  const std::size_t n_ahus = u.unit_type == "small_office" ? 1 : 3;
  if (o.has("zones")) {
    const auto& arr = o.raw("zones");
    const auto path = o.path_of("zones");
    if (!arr.is_array() || arr.size() != n_zones)
      throw ConfigError(path, "expected an array of " + std::to_string(n_zones) + " zone objects");
    for (std::size_t i = 0; i < arr.size(); ++i) u.zones.push_back(parse_zone_override(JsonObject(arr[i], index_path(path, i))));
  }
  if (o.has("vav")) u.vavs.push_back(parse_vav_override(o.object("vav")));
  if (o.has("vavs")) {
    if (!u.vavs.empty()) throw ConfigError(o.path_of("vavs"), "give either vav or vavs, not both");
    const auto& arr = o.raw("vavs");
    const auto path = o.path_of("vavs");
    if (!arr.is_array() || arr.size() != n_ahus)
      throw ConfigError(path, "expected an array of " + std::to_string(n_ahus) + " vav objects");
    for (std::size_t i = 0; i < arr.size(); ++i) u.vavs.push_back(parse_vav_override(JsonObject(arr[i], index_path(path, i))));
  }
  if (o.has("initial_temperature")) u.initial_temperature = o.require<double>("initial_temperature");
  o.finish();
  return u;
}

inline WeatherConfig parse_weather_config(JsonObject o) {
  WeatherConfig w;
  if (o.has("csv")) {
    w.csv = o.require<std::string>("csv");
    w.csv_dates = o.require<std::vector<std::string>>("dates");
    if (w.csv_dates.empty()) throw ConfigError(o.path_of("dates"), "at least one date is required");
  } else {
    const auto& arr = o.raw("days");
    const auto path = o.path_of("days");
    if (!arr.is_array() || arr.empty()) throw ConfigError(path, "expected a non-empty array of days");
    for (std::size_t i = 0; i < arr.size(); ++i) {
      JsonObject d(arr[i], index_path(path, i));
      SyntheticDaySpec s;
      s.date = d.require<std::string>("date");
      s.peak = d.require<double>("peak");
      s.min = d.require<double>("min");
      s.peak_hour = d.get<double>("peak_hour", 16.0);
      if (!(s.min < s.peak)) throw ConfigError(d.path_of("min"), "min must be below peak");
      d.finish();
      w.synthetic.push_back(s);
    }
  }
  o.finish();
  std::vector<std::string> dates = w.csv.empty() ? std::vector<std::string>{} : w.csv_dates;
  for (const auto& s : w.synthetic) dates.push_back(s.date);
  std::sort(dates.begin(), dates.end());
  if (std::adjacent_find(dates.begin(), dates.end()) != dates.end())
    throw ConfigError(o.path(), "duplicate weather date");
  return w;
}

inline HubConfig parse_hub_config(JsonObject o) {
  HubConfig c;
  c.step = o.get<double>("step", 900.0);
  if (!(c.step > 0.0)) throw ConfigError(o.path_of("step"), "step must be positive");
  const double per_day = 86400.0 / c.step;
  if (std::abs(per_day - std::round(per_day)) > 1e-9)
    throw ConfigError(o.path_of("step"), "step " + format_number(c.step) + " s does not divide a day");

  const auto& arr = o.raw("units");
  const auto upath = o.path_of("units");
  if (!arr.is_array()) throw ConfigError(upath, "expected an array");
  if (arr.empty()) throw ConfigError(upath, "at least one unit is required");
  for (std::size_t i = 0; i < arr.size(); ++i) c.units.push_back(parse_unit_entry(JsonObject(arr[i], index_path(upath, i))));

  c.weather = parse_weather_config(o.object("weather"));
  c.test_day = o.require<std::string>("test_day");
  c.training_days = o.get<std::vector<std::string>>("training_days", {});
  c.start = o.get<std::string>("start", c.test_day);
  c.duration_days = o.get<int>("duration_days", 1);
  if (c.duration_days < 1) throw ConfigError(o.path_of("duration_days"), "duration must be at least one day");
  c.record = o.get<bool>("record", true);
  c.record_diagnostics = o.get<bool>("record_diagnostics", true);
  c.parallel_step = o.get<bool>("parallel_step", false);
  o.finish();

  const auto dates = c.dates();
  auto check_day = [&](const std::string& d, const std::string& path) {
    if (std::find(dates.begin(), dates.end(), d) == dates.end())
      throw ConfigError(path, "no weather for day '" + d + "'");
  };
  check_day(c.test_day, o.path_of("test_day"));
  for (std::size_t i = 0; i < c.training_days.size(); ++i)
    check_day(c.training_days[i], index_path(o.path_of("training_days"), i));
  check_day(c.start, o.path_of("start"));
  if (c.day_index(c.start) + static_cast<std::size_t>(c.duration_days) > dates.size())
    throw ConfigError(o.path_of("duration_days"), "simulation runs past the last weather day");
  return c;
}

// Standalone hub document: the hub object itself at the top level.
inline HubConfig parse_config(const std::string& text) {
  const Json j = parse_json_text(text);
  return parse_hub_config(JsonObject(j, ""));
}

inline std::shared_ptr<const WeatherSeries> build_weather(const HubConfig& c) {
  const auto per_day = c.steps_per_day();
  std::vector<WeatherDay> days;
  if (!c.weather.csv.empty()) {
    std::filesystem::path p = c.weather.csv;
    if (p.is_relative()) p = c.base_dir / p;
    days = read_weather_csv(p.string(), per_day);
    if (days.size() != c.weather.csv_dates.size())
      throw ConfigError("hub.weather.dates", "csv holds " + std::to_string(days.size()) + " days but " +
                                                 std::to_string(c.weather.csv_dates.size()) + " dates are listed");
  } else {
    for (const auto& s : c.weather.synthetic) days.push_back(synthetic_weather(s.peak, s.min, s.peak_hour, per_day));
  }
  return std::make_shared<const WeatherSeries>(std::move(days), c.step);
}

// ---------------------------------------------------------------- units

struct UnitAssignment {
  std::string index;  // fmu_1, fmu_2, ...
  std::string label;
  std::size_t entry = 0;  // position in HubConfig::units
};

// Indices follow configuration order; entries with count > 1 expand in place.
inline std::vector<UnitAssignment> allocate_indices(const HubConfig& c) {
  std::vector<UnitAssignment> out;
  for (std::size_t e = 0; e < c.units.size(); ++e) {
    const auto& u = c.units[e];
    for (int k = 0; k < u.count; ++k) {
      const auto label = u.count == 1 ? u.name : u.name + "_" + std::to_string(k + 1);
      out.push_back({"fmu_" + std::to_string(out.size() + 1), label, e});
    }
  }
  return out;
}

inline std::unique_ptr<CoSimUnit> build_unit(const UnitEntry& u, std::shared_ptr<const WeatherSeries> weather) {
  BuildingLayout layout;
  if (u.unit_type == "small_office") {
    auto zones = default_small_office_zones();
    auto vav = default_small_office_vav();
    if (!u.vavs.empty()) u.vavs.front().apply(vav);
    layout = small_office_layout(std::move(zones), vav, u.schedule);
  } else {
    auto vav = default_medium_office_vav();
    std::vector<VavParams> vavs(3, vav);
    if (u.vavs.size() == 1)
      for (auto& v : vavs) u.vavs.front().apply(v);
    if (u.vavs.size() == 3)
      for (std::size_t i = 0; i < 3; ++i) u.vavs[i].apply(vavs[i]);
    layout = medium_office_layout(default_medium_office_floors(), std::move(vavs), u.schedule);
  }
  for (std::size_t i = 0; i < u.zones.size(); ++i) u.zones[i].apply(layout.zones[i]);
  if (u.initial_temperature) layout.initial_temperature = *u.initial_temperature;
  return std::make_unique<OfficeBuilding>(std::move(layout), std::move(weather));
}

struct UnitSlot {
  std::string index;
  std::string label;
  std::unique_ptr<CoSimUnit> unit;
};

// I/O definition per unit type, resolved from the unit metadata.
struct IOEntry {
  std::vector<std::string> input_names, output_names;
  std::vector<double> input_lower, input_upper, input_granularity;
  std::vector<double> output_lower, output_upper;
};

struct IOGroup {
  std::map<std::string, IOEntry> by_type;

  const IOEntry& at(const std::string& unit_type) const {
    const auto it = by_type.find(unit_type);
    if (it == by_type.end()) throw Error("no I/O definition for unit type " + unit_type);
    return it->second;
  }
};

inline IOGroup build_io_group(const std::vector<UnitSlot>& units) {
  IOGroup io;
  for (const auto& slot : units) {
    const auto& meta = slot.unit->metadata();
    const auto check = validate_metadata(meta);
    if (!check) throw UnitError(slot.index, "invalid metadata: " + check.errors.front());
    IOEntry e;
    for (const auto* v : meta.inputs()) {
      e.input_names.push_back(v->name);
      e.input_lower.push_back(v->lower_bound);
      e.input_upper.push_back(v->upper_bound);
      e.input_granularity.push_back(v->granularity);
    }
    for (const auto* v : meta.outputs()) {
      e.output_names.push_back(v->name);
      e.output_lower.push_back(v->lower_bound);
      e.output_upper.push_back(v->upper_bound);
    }
    const auto [it, inserted] = io.by_type.emplace(meta.unit_type, e);
    if (!inserted && (it->second.input_names != e.input_names || it->second.output_names != e.output_names))
      throw UnitError(slot.index, "variables differ from other units of type " + meta.unit_type);
  }
  return io;
}

// ---------------------------------------------------------------- time axis

struct TimeAxis {
  double t0 = 0.0;  // seconds from midnight of the first weather day
  double step = 900.0;
  std::size_t n_steps = 0;

  // Computed from the index rather than accumulated, so no drift.
  double at(std::size_t k) const { return t0 + static_cast<double>(k) * step; }
  double hour_of_day(std::size_t k) const { return std::fmod(at(k), 86400.0) / 3600.0; }
};

// ---------------------------------------------------------------- storage

struct RecordRow {
  std::size_t step = 0;  // 1-based index of the executed step
  std::vector<double> inputs;
  std::vector<double> outputs;
  std::vector<double> diagnostics;
};

struct UnitTable {
  std::string index, label, unit_type;
  std::vector<std::string> input_names, output_names, diagnostic_names;
  std::vector<double> initial_outputs;
  std::vector<RecordRow> rows;
};

struct RewardRow {
  std::size_t step = 0;
  double hour = 0.0;  // hour of day at the start of the step
  RewardBreakdown breakdown;
};

struct SimRecord {
  TimeAxis axis;
  std::vector<UnitTable> units;
  std::vector<RewardRow> rewards;
  RewardConfig reward_config;  // weights used for the weighted columns
  bool diagnostics = true;

  void clear() {
    for (auto& u : units) {
      u.initial_outputs.clear();
      u.rows.clear();
    }
    rewards.clear();
  }

  std::size_t steps() const { return units.empty() ? rewards.size() : units.front().rows.size(); }
};

inline SimRecord make_record(const std::vector<UnitSlot>& units, bool diagnostics) {
  SimRecord r;
  r.diagnostics = diagnostics;
  for (const auto& slot : units) {
    UnitTable t;
    t.index = slot.index;
    t.label = slot.label;
    const auto& meta = slot.unit->metadata();
    t.unit_type = meta.unit_type;
    for (const auto* v : meta.inputs()) t.input_names.push_back(v->name);
    for (const auto* v : meta.outputs()) t.output_names.push_back(v->name);
    if (diagnostics)
      for (const auto& [name, value] : slot.unit->diagnostics()) t.diagnostic_names.push_back(name);
    r.units.push_back(std::move(t));
  }
  return r;
}

// ---------------------------------------------------------------- master loop

// Outputs of every unit in index order, concatenated. `step` counts executed
// steps: 0 is the state right after initialization.
inline std::vector<double> collect_outputs(const std::vector<UnitSlot>& units, const IOGroup& io, SimRecord* record,
                                           std::size_t step) {
  std::vector<double> raw;
  if (units.empty()) return raw;
  const double t = units.front().unit->time();
  for (std::size_t i = 0; i < units.size(); ++i) {
    const auto& slot = units[i];
    if (slot.unit->time() != t)
      throw UnitError(slot.index, "clock " + format_number(slot.unit->time()) + " s out of sync with " +
                                      format_number(t) + " s");
    auto out = slot.unit->get_outputs();
    if (out.size() != io.at(slot.unit->metadata().unit_type).output_names.size())
      throw UnitError(slot.index, "returned the wrong number of outputs");
    if (record) {
      auto& table = record->units.at(i);
      if (step == 0) {
        table.initial_outputs = out;
      } else {
        if (table.rows.empty() || table.rows.back().step != step || !table.rows.back().outputs.empty())
          throw Error("record out of order at step " + std::to_string(step));
        table.rows.back().outputs = out;
        if (record->diagnostics)
          for (const auto& [name, value] : slot.unit->diagnostics()) table.rows.back().diagnostics.push_back(value);
      }
    }
    raw.insert(raw.end(), out.begin(), out.end());
  }
  return raw;
}

// `step` is the 0-based index of the step about to run.
inline void apply_actions(std::vector<UnitSlot>& units, const IOGroup& io,
                          const std::vector<std::vector<double>>& actions, SimRecord* record, std::size_t step) {
  if (actions.size() != units.size())
    throw ShapeError("expected actions for " + std::to_string(units.size()) + " units, got " +
                     std::to_string(actions.size()));
  for (std::size_t i = 0; i < units.size(); ++i) {
    const auto expected = io.at(units[i].unit->metadata().unit_type).input_names.size();
    if (actions[i].size() != expected)
      throw ShapeError(units[i].index + ": expected " + std::to_string(expected) + " setpoints, got " +
                       std::to_string(actions[i].size()));
  }
  for (std::size_t i = 0; i < units.size(); ++i) {
    units[i].unit->set_inputs(actions[i]);
    if (record) {
      RecordRow row;
      row.step = step + 1;
      row.inputs = actions[i];
      record->units.at(i).rows.push_back(std::move(row));
    }
  }
}

inline void step_all(std::vector<UnitSlot>& units, double dt, bool parallel = false) {
  auto run = [dt](UnitSlot& slot) {
    try {
      slot.unit->do_step(dt);
    } catch (const UnitError&) {
      throw;
    } catch (const std::exception& e) {
      throw UnitError(slot.index, e.what());
    }
  };
  if (!parallel || units.size() < 2) {
    for (auto& slot : units) run(slot);
    return;
  }
  std::vector<std::future<void>> jobs;
  jobs.reserve(units.size());
  for (auto& slot : units) jobs.push_back(std::async(std::launch::async, run, std::ref(slot)));
  for (auto& j : jobs) j.get();  // rethrows the first failure in index order
}

// ---------------------------------------------------------------- export

inline std::vector<std::filesystem::path> export_csv(const SimRecord& record, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  std::vector<std::filesystem::path> written;
  for (const auto& t : record.units) {
    const auto path = dir / (t.index + ".csv");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    out << "step,hour";
    for (const auto& n : t.input_names) out << ',' << t.index << '.' << n;
    for (const auto& n : t.output_names) out << ',' << t.index << '.' << n;
    for (const auto& n : t.diagnostic_names) out << ',' << t.index << '.' << n;
    out << '\n';
    for (const auto& row : t.rows) {
      out << row.step << ',' << format_number(record.axis.hour_of_day(row.step - 1));
      for (double v : row.inputs) out << ',' << format_number(v);
      for (double v : row.outputs) out << ',' << format_number(v);
      for (double v : row.diagnostics) out << ',' << format_number(v);
      out << '\n';
    }
    if (!out) throw Error("failed writing " + path.string());
    written.push_back(path);
  }

  const auto path = dir / "rewards.csv";
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << "step,hour,power,p_hvac,p_temp,p_peak,weighted_power,weighted_comfort,weighted_peak,reward\n";
  const auto& c = record.reward_config;
  for (const auto& r : record.rewards) {
    const auto& b = r.breakdown;
    out << r.step << ',' << format_number(r.hour) << ',' << format_number(b.power) << ',' << format_number(b.p_hvac)
        << ',' << format_number(b.p_temp) << ',' << format_number(b.p_peak) << ','
        << format_number(b.weighted_power(c)) << ',' << format_number(b.weighted_comfort(c)) << ','
        << format_number(b.weighted_peak(c)) << ',' << format_number(b.reward) << '\n';
  }
  if (!out) throw Error("failed writing " + path.string());
  written.push_back(path);
  return written;
}

// ---------------------------------------------------------------- hub

class Hub {
 public:
  explicit Hub(HubConfig config) : config_(std::move(config)) {
    weather_ = build_weather(config_);
    for (const auto& a : allocate_indices(config_))
      units_.push_back({a.index, a.label, build_unit(config_.units[a.entry], weather_)});
    io_ = build_io_group(units_);
    record_ = make_record(units_, config_.record_diagnostics);
    reset(config_.day_index(config_.start), static_cast<std::size_t>(config_.duration_days));
  }

  const HubConfig& config() const { return config_; }
  const IOGroup& io() const { return io_; }
  const std::vector<UnitSlot>& units() const { return units_; }
  std::size_t unit_count() const { return units_.size(); }
  const WeatherSeries& weather() const { return *weather_; }
  const TimeAxis& axis() const { return axis_; }
  const SimRecord& record() const { return record_; }
  SimRecord& record() { return record_; }
  bool recording() const { return config_.record; }

  std::size_t steps_done() const { return step_; }
  bool finished() const { return step_ >= axis_.n_steps; }

  // Re-initializes every unit at midnight of `day_index` and clears the logs.
  void reset(std::size_t day_index, std::size_t days = 1) {
    if (day_index + days > weather_->day_count()) throw RangeError("reset past the last weather day");
    axis_ = {static_cast<double>(day_index) * 86400.0, config_.step, days * config_.steps_per_day()};
    for (auto& slot : units_) slot.unit->initialize(axis_.t0);
    record_.clear();
    record_.axis = axis_;
    step_ = 0;
  }

  std::vector<double> collect() { return collect_outputs(units_, io_, recording() ? &record_ : nullptr, step_); }

  void apply(const std::vector<std::vector<double>>& actions) {
    if (finished()) throw Error("hub already ran every step of the time axis");
    apply_actions(units_, io_, actions, recording() ? &record_ : nullptr, step_);
  }

  void step() {
    if (finished()) throw Error("hub already ran every step of the time axis");
    step_all(units_, config_.step, config_.parallel_step);
    ++step_;
    for (const auto& slot : units_)
      if (std::abs(slot.unit->time() - axis_.at(step_)) > 1e-6)
        throw UnitError(slot.index, "clock drifted from the time axis");
  }

  void log_reward(const RewardBreakdown& b, double hour) {
    if (recording()) record_.rewards.push_back({step_, hour, b});
  }

  std::vector<std::filesystem::path> export_csv(const std::filesystem::path& dir) const {
    return clusterflex::export_csv(record_, dir);
  }

 private:
  HubConfig config_;
  std::shared_ptr<const WeatherSeries> weather_;
  std::vector<UnitSlot> units_;
  IOGroup io_;
  SimRecord record_;
  TimeAxis axis_;
  std::size_t step_ = 0;
};

}  // namespace clusterflex
