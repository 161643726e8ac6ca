#pragma once

// Co-simulation unit contract. A unit is the in-process analogue of a
// co-simulation FMU: metadata describing every exchangeable variable plus a
// stepping interface (initialize / set_inputs / do_step / get_outputs).

#include <algorithm>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <unordered_set>
#include <utility>
#include <vector>

#include "clusterflex/error.hpp"

namespace clusterflex {

enum class Causality { input, output };

// What a variable means to the layers above the unit. Lets the environment
// find powers, zone temperatures and weather without parsing names.
enum class VariableRole {
  outdoor_dry_bulb,
  outdoor_humidity,
  wind_speed,
  direct_solar,
  coil_power,
  fan_power,
  supply_air_temperature,
  supply_air_flow,
  zone_temperature,
  supply_air_setpoint,
  zone_setpoint,
};

inline bool is_weather_role(VariableRole role) {
  return role == VariableRole::outdoor_dry_bulb || role == VariableRole::outdoor_humidity ||
         role == VariableRole::wind_speed || role == VariableRole::direct_solar;
}

struct VariableSpec {
  std::string name;
  Causality causality = Causality::output;
  VariableRole role = VariableRole::zone_temperature;
  std::string unit;
  double lower_bound = 0.0;
  double upper_bound = 1.0;
  double granularity = 0.0;  // discretization step, inputs only

  double clamp(double value) const { return std::clamp(value, lower_bound, upper_bound); }

  bool operator==(const VariableSpec&) const = default;
};

struct UnitMetadata {
  std::string unit_type;
  std::vector<VariableSpec> variables;  // declaration order is the I/O index order
  double default_step = 900.0;

  std::vector<const VariableSpec*> inputs() const { return filter(Causality::input); }
  std::vector<const VariableSpec*> outputs() const { return filter(Causality::output); }

  std::size_t input_count() const { return count(Causality::input); }
  std::size_t output_count() const { return count(Causality::output); }

  bool operator==(const UnitMetadata&) const = default;

 private:
  std::vector<const VariableSpec*> filter(Causality c) const {
    std::vector<const VariableSpec*> out;
    for (const auto& v : variables)
      if (v.causality == c) out.push_back(&v);
    return out;
  }
  std::size_t count(Causality c) const {
    return static_cast<std::size_t>(std::count_if(
        variables.begin(), variables.end(), [c](const VariableSpec& v) { return v.causality == c; }));
  }
};

struct ValidationResult {
  std::vector<std::string> errors;

  bool ok() const { return errors.empty(); }
  explicit operator bool() const { return ok(); }
};

// Expected I/O cardinality of the known building types.
struct KnownUnitShape {
  std::string_view unit_type;
  std::size_t inputs;
  std::size_t outputs;
};

inline constexpr KnownUnitShape kKnownUnitShapes[] = {
    {"small_office", 6, 13},
    {"medium_office", 6, 19},
};

inline ValidationResult validate_metadata(const UnitMetadata& meta) {
  ValidationResult result;
  if (!(meta.default_step > 0.0)) result.errors.push_back("default_step must be positive");

  std::unordered_set<std::string> seen;
  for (const auto& v : meta.variables) {
    if (v.name.empty()) result.errors.push_back("variable with empty name");
    if (!seen.insert(v.name).second) result.errors.push_back("duplicate variable name '" + v.name + "'");
    if (!(v.lower_bound < v.upper_bound))
      result.errors.push_back("variable '" + v.name + "' has inverted or degenerate bounds");
    if (v.causality == Causality::input && !(v.granularity > 0.0))
      result.errors.push_back("input '" + v.name + "' needs a positive granularity");
  }

  for (const auto& known : kKnownUnitShapes) {
    if (meta.unit_type != known.unit_type) continue;
    if (meta.input_count() != known.inputs || meta.output_count() != known.outputs) {
      result.errors.push_back(meta.unit_type + " must declare " + std::to_string(known.inputs) +
                              " inputs and " + std::to_string(known.outputs) + " outputs, got " +
                              std::to_string(meta.input_count()) + "/" +
                              std::to_string(meta.output_count()));
    }
  }
  return result;
}

inline const VariableSpec& lookup_variable(const UnitMetadata& meta, std::string_view name) {
  for (const auto& v : meta.variables)
    if (v.name == name) return v;
  throw Error("unknown variable '" + std::string(name) + "' in unit type " + meta.unit_type);
}

// Position of `name` among the variables of the same causality.
inline std::size_t io_index(const UnitMetadata& meta, std::string_view name) {
  const auto& spec = lookup_variable(meta, name);
  std::size_t index = 0;
  for (const auto& v : meta.variables) {
    if (&v == &spec) return index;
    if (v.causality == spec.causality) ++index;
  }
  return index;
}

// Behavioural contract. set_inputs takes effect at the next do_step; units
// are movable between threads but must only be touched by one at a time.
class CoSimUnit {
 public:
  virtual ~CoSimUnit() = default;

  virtual const UnitMetadata& metadata() const = 0;

  // Resets all internal state and places the unit clock at `start_time`.
  virtual void initialize(double start_time) = 0;

  // Values in declared input order.
  virtual void set_inputs(std::span<const double> values) = 0;

  virtual void do_step(double dt) = 0;

  // Values in declared output order.
  virtual std::vector<double> get_outputs() const = 0;

  virtual double time() const = 0;

  // Extra named values that are not part of the declared outputs.
  virtual std::vector<std::pair<std::string, double>> diagnostics() const { return {}; }

  virtual std::unique_ptr<CoSimUnit> clone() const = 0;
};

}  // namespace clusterflex
