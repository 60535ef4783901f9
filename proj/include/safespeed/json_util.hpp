#pragma once

#include <stdexcept>
#include <string>

#include "json.hpp"

// Readers that fail with the full key path, so a bad config names the exact
// field instead of an offset. Used by the run config and scenario parsers.
namespace safespeed::jsonu {

inline std::string join(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

inline const nlohmann::json& require(const nlohmann::json& obj, const std::string& key,
                                     const std::string& path) {
  if (!obj.is_object())
    throw std::runtime_error("config error: expected an object at '" +
                             (path.empty() ? std::string("<root>") : path) + "'");
  const auto it = obj.find(key);
  if (it == obj.end()) throw std::runtime_error("config error: missing key '" + join(path, key) + "'");
  return *it;
}

inline double num(const nlohmann::json& v, const std::string& path) {
  if (!v.is_number()) throw std::runtime_error("config error: '" + path + "' must be a number");
  return v.get<double>();
}

inline long long integer(const nlohmann::json& v, const std::string& path) {
  if (!v.is_number_integer())
    throw std::runtime_error("config error: '" + path + "' must be an integer");
  return v.get<long long>();
}

inline std::string str(const nlohmann::json& v, const std::string& path) {
  if (!v.is_string()) throw std::runtime_error("config error: '" + path + "' must be a string");
  return v.get<std::string>();
}

inline bool boolean(const nlohmann::json& v, const std::string& path) {
  if (!v.is_boolean()) throw std::runtime_error("config error: '" + path + "' must be a boolean");
  return v.get<bool>();
}

inline double num_or(const nlohmann::json& obj, const std::string& key, const std::string& path,
                     double fallback) {
  if (!obj.is_object() || !obj.contains(key)) return fallback;
  return num(obj.at(key), join(path, key));
}

inline long long int_or(const nlohmann::json& obj, const std::string& key, const std::string& path,
                        long long fallback) {
  if (!obj.is_object() || !obj.contains(key)) return fallback;
  return integer(obj.at(key), join(path, key));
}

inline std::string str_or(const nlohmann::json& obj, const std::string& key,
                          const std::string& path, const std::string& fallback) {
  if (!obj.is_object() || !obj.contains(key)) return fallback;
  return str(obj.at(key), join(path, key));
}

inline bool bool_or(const nlohmann::json& obj, const std::string& key, const std::string& path,
                    bool fallback) {
  if (!obj.is_object() || !obj.contains(key)) return fallback;
  return boolean(obj.at(key), join(path, key));
}

}  // namespace safespeed::jsonu
