#pragma once

#include <string>
#include <string_view>

#include <json.hpp>

#include "spillnet/error.hpp"

namespace spillnet::jsonutil {

using json = nlohmann::json;

inline constexpr const char* kSchemaVersion = "1.0";

[[noreturn]] inline void schema_error(const std::string& pointer, const std::string& what) {
  throw Error(ErrorCode::SchemaError, (pointer.empty() ? std::string("/") : pointer) + ": " + what);
}

inline json parse(std::string_view text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::ParseError, e.what());
  }
}

inline const json& require(const json& obj, const std::string& pointer, const char* key) {
  if (!obj.is_object()) schema_error(pointer, "expected object");
  auto it = obj.find(key);
  if (it == obj.end()) schema_error(pointer + "/" + key, "missing required field");
  return *it;
}

template <class T>
T get_as(const json& obj, const std::string& pointer, const char* key) {
  const json& v = require(obj, pointer, key);
  try {
    return v.get<T>();
  } catch (const json::exception&) {
    schema_error(pointer + "/" + key, "wrong type");
  }
}

template <class T>
T get_or(const json& obj, const std::string& pointer, const char* key, T fallback) {
  if (!obj.is_object() || !obj.contains(key)) return fallback;
  return get_as<T>(obj, pointer, key);
}

/// Accepts a missing version (legacy) or any 1.x; rejects other majors.
inline void check_schema_version(const json& doc, bool required = false) {
  if (!doc.is_object()) schema_error("", "expected object");
  auto it = doc.find("schema_version");
  if (it == doc.end()) {
    if (required) schema_error("/schema_version", "missing required field");
    return;
  }
  if (!it->is_string()) schema_error("/schema_version", "expected string");
  const std::string v = it->get<std::string>();
  if (v.rfind("1.", 0) != 0 && v != "1") schema_error("/schema_version", "unsupported major version " + v);
}

}  // namespace spillnet::jsonutil
