#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <istream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "clusterflex/error.hpp"

namespace clusterflex {

struct WeatherSample {
  double dry_bulb = 0.0;           // degC
  double relative_humidity = 0.0;  // %
  double wind_speed = 0.0;         // m/s
  double direct_solar = 0.0;       // W/m2
};

struct WeatherDay {
  std::vector<double> dry_bulb_by_step;
  std::vector<double> relative_humidity;
  std::vector<double> wind_speed;
  std::vector<double> direct_solar;

  std::size_t steps() const { return dry_bulb_by_step.size(); }

  WeatherSample sample(std::size_t step) const {
    return {dry_bulb_by_step.at(step), relative_humidity.at(step), wind_speed.at(step),
            direct_solar.at(step)};
  }

  void push_back(const WeatherSample& s) {
    dry_bulb_by_step.push_back(s.dry_bulb);
    relative_humidity.push_back(s.relative_humidity);
    wind_speed.push_back(s.wind_speed);
    direct_solar.push_back(s.direct_solar);
  }

  void validate() const {
    const auto n = steps();
    if (n == 0) throw Error("weather day has no samples");
    if (relative_humidity.size() != n || wind_speed.size() != n || direct_solar.size() != n)
      throw Error("weather day columns have unequal lengths");
    for (std::size_t k = 0; k < n; ++k) {
      if (relative_humidity[k] < 0.0 || relative_humidity[k] > 100.0)
        throw Error("relative humidity outside [0, 100] at step " + std::to_string(k));
      if (direct_solar[k] < 0.0) throw Error("negative solar at step " + std::to_string(k));
      if (wind_speed[k] < 0.0) throw Error("negative wind speed at step " + std::to_string(k));
    }
  }
};

// Consecutive days on a fixed step. Time zero is midnight of the first day.
class WeatherSeries {
 public:
  WeatherSeries() = default;
  WeatherSeries(std::vector<WeatherDay> days, double step_seconds)
      : days_(std::move(days)), step_(step_seconds) {
    if (days_.empty()) throw Error("weather series needs at least one day");
    for (const auto& d : days_) {
      d.validate();
      if (d.steps() != days_.front().steps()) throw Error("weather days differ in length");
    }
    if (std::abs(step_ * static_cast<double>(days_.front().steps()) - 86400.0) > 1e-6)
      throw Error("weather step does not match the samples per day");
  }

  std::size_t day_count() const { return days_.size(); }
  std::size_t steps_per_day() const { return days_.empty() ? 0 : days_.front().steps(); }
  double step() const { return step_; }
  const WeatherDay& day(std::size_t index) const { return days_.at(index); }

  // Piecewise-constant lookup; times past the end hold the last sample.
  WeatherSample at(double time) const {
    const auto per_day = steps_per_day();
    const auto total = static_cast<long long>(per_day * days_.size());
    auto k = static_cast<long long>(std::floor(time / step_ + 1e-9));
    if (k < 0) k = 0;
    if (k >= total) k = total - 1;
    return days_[static_cast<std::size_t>(k) / per_day].sample(static_cast<std::size_t>(k) % per_day);
  }

 private:
  std::vector<WeatherDay> days_;
  double step_ = 900.0;
};

struct SyntheticDayShape {
  double min_hour = 6.0;
  double solar_peak = 750.0;  // W/m2 at solar noon
  double sunrise = 5.0;
  double sunset = 19.0;
};

// Diurnal profile: a half-cosine rise from the minimum (at min_hour) to the
// peak, then a half-cosine decay back to the next day's minimum.
inline WeatherDay synthetic_weather(double peak_temp, double min_temp, double peak_hour,
                                    std::size_t steps_per_day, SyntheticDayShape shape = {}) {
  if (!(min_temp < peak_temp)) throw RangeError("synthetic weather needs min_temp < peak_temp");
  if (steps_per_day == 0) throw RangeError("steps_per_day must be positive");
  if (!(peak_hour > shape.min_hour && peak_hour < shape.min_hour + 24.0))
    throw RangeError("peak hour must follow the minimum hour within a day");

  const double amplitude = peak_temp - min_temp;
  const double rise = peak_hour - shape.min_hour;
  const double fall = 24.0 - rise;

  WeatherDay day;
  for (std::size_t k = 0; k < steps_per_day; ++k) {
    const double hour = 24.0 * static_cast<double>(k) / static_cast<double>(steps_per_day);
    const double since_min = std::fmod(hour - shape.min_hour + 24.0, 24.0);
    double level;  // 0 at the minimum, 1 at the peak
    if (since_min <= rise)
      level = 0.5 * (1.0 - std::cos(std::numbers::pi * since_min / rise));
    else
      level = 0.5 * (1.0 + std::cos(std::numbers::pi * (since_min - rise) / fall));

    WeatherSample s;
    s.dry_bulb = std::clamp(min_temp + amplitude * level, min_temp, peak_temp);
    s.relative_humidity = 85.0 - 40.0 * level;
    s.wind_speed = 1.5 + 2.0 * level;
    if (hour > shape.sunrise && hour < shape.sunset) {
      const double phase = (hour - shape.sunrise) / (shape.sunset - shape.sunrise);
      s.direct_solar = shape.solar_peak * std::sin(std::numbers::pi * phase);
    }
    day.push_back(s);
  }
  return day;
}

// One row per step: dry_bulb,rh,wind,solar. A non-numeric first line is
// treated as a header.
inline std::vector<WeatherDay> read_weather_csv(std::istream& in, std::size_t steps_per_day) {
  if (steps_per_day == 0) throw RangeError("steps_per_day must be positive");
  std::vector<WeatherDay> days;
  WeatherDay current;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    double values[4];
    int n = 0;
    bool numeric = true;
    while (std::getline(ss, cell, ',')) {
      if (n >= 4) throw Error("weather csv line " + std::to_string(line_no) + ": too many columns");
      try {
        std::size_t used = 0;
        values[n] = std::stod(cell, &used);
      } catch (const std::exception&) {
        numeric = false;
        break;
      }
      ++n;
    }
    if (!numeric) {
      if (line_no == 1) continue;
      throw Error("weather csv line " + std::to_string(line_no) + ": not numeric");
    }
    if (n != 4) throw Error("weather csv line " + std::to_string(line_no) + ": expected 4 columns");
    current.push_back({values[0], values[1], values[2], values[3]});
    if (current.steps() == steps_per_day) {
      current.validate();
      days.push_back(std::move(current));
      current = {};
    }
  }
  if (current.steps() != 0) throw Error("weather csv does not contain whole days");
  if (days.empty()) throw Error("weather csv is empty");
  return days;
}

inline std::vector<WeatherDay> read_weather_csv(const std::string& path, std::size_t steps_per_day) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open weather file " + path);
  return read_weather_csv(in, steps_per_day);
}

}  // namespace clusterflex
