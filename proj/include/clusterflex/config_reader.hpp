#pragma once

// Strict JSON object reader. Every key must be consumed; leftovers are
// reported with their full path so typos never fall back to defaults.

#include <set>
#include <string>
#include <type_traits>
#include <vector>

#include <json.hpp>

#include "clusterflex/error.hpp"

namespace clusterflex {

using Json = nlohmann::json;

inline std::string join_path(const std::string& base, const std::string& key) {
  return base.empty() ? key : base + "." + key;
}

inline std::string index_path(const std::string& base, std::size_t i) {
  return base + "[" + std::to_string(i) + "]";
}

template <typename T>
T json_value(const Json& j, const std::string& path) {
  if constexpr (std::is_same_v<T, bool>) {
    if (!j.is_boolean()) throw ConfigError(path, "expected a boolean");
    return j.get<bool>();
  } else if constexpr (std::is_integral_v<T>) {
    if (!j.is_number_integer()) throw ConfigError(path, "expected an integer");
    if constexpr (std::is_unsigned_v<T>) {
      if (j.is_number_unsigned()) return j.get<T>();
      if (j.get<long long>() < 0) throw ConfigError(path, "expected a non-negative integer");
    }
    return j.get<T>();
  } else if constexpr (std::is_floating_point_v<T>) {
    if (!j.is_number()) throw ConfigError(path, "expected a number");
    return j.get<T>();
  } else if constexpr (std::is_same_v<T, std::string>) {
    if (!j.is_string()) throw ConfigError(path, "expected a string");
    return j.get<std::string>();
  } else {
    // vectors of the above
    if (!j.is_array()) throw ConfigError(path, "expected an array");
    T out;
    for (std::size_t i = 0; i < j.size(); ++i)
      out.push_back(json_value<typename T::value_type>(j[i], index_path(path, i)));
    return out;
  }
}

class JsonObject {
 public:
  JsonObject(const Json& j, std::string path) : j_(&j), path_(std::move(path)) {
    if (!j.is_object()) throw ConfigError(path_, "expected an object");
  }

  const std::string& path() const { return path_; }
  std::string path_of(const std::string& key) const { return join_path(path_, key); }

  bool has(const std::string& key) const { return j_->contains(key); }

  const Json& raw(const std::string& key) {
    if (!has(key)) throw ConfigError(path_of(key), "missing required key");
    used_.insert(key);
    return j_->at(key);
  }

  template <typename T>
  T require(const std::string& key) {
    return json_value<T>(raw(key), path_of(key));
  }

  template <typename T>
  T get(const std::string& key, T fallback) {
    if (!has(key)) return fallback;
    return require<T>(key);
  }

  JsonObject object(const std::string& key) { return JsonObject(raw(key), path_of(key)); }

  // Throws on the first key that nobody asked for.
  void finish() const {
    for (auto it = j_->begin(); it != j_->end(); ++it)
      if (!used_.count(it.key())) throw ConfigError(path_of(it.key()), "unknown key");
  }

 private:
  const Json* j_;
  std::string path_;
  std::set<std::string> used_;
};

inline Json parse_json_text(const std::string& text) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw ConfigError("", std::string("malformed JSON: ") + e.what());
  }
}

}  // namespace clusterflex
