#pragma once

#include <stdexcept>
#include <string>

namespace clusterflex {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Raised while parsing or validating configuration. `path` points at the
// offending key, e.g. "units[2].count".
class ConfigError : public Error {
 public:
  ConfigError(std::string path, const std::string& message)
      : Error(path.empty() ? message : path + ": " + message), path_(std::move(path)) {}

  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

class ShapeError : public Error {
 public:
  using Error::Error;
};

class RangeError : public Error {
 public:
  using Error::Error;
};

// A unit failed during stepping; carries the hub index of the unit.
class UnitError : public Error {
 public:
  UnitError(std::string unit_index, const std::string& message)
      : Error(unit_index + ": " + message), unit_index_(std::move(unit_index)) {}

  const std::string& unit_index() const noexcept { return unit_index_; }

 private:
  std::string unit_index_;
};

// Non-finite values showed up in a loss or gradient.
class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace clusterflex
