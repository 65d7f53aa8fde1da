#ifndef GLRU_TESTS_SCHEMA_CHECK_HPP
#define GLRU_TESTS_SCHEMA_CHECK_HPP

// A small JSON Schema validator covering the keywords the shipped schemas
// use: type, enum, required, properties, items, minimum, pattern.

#include <json.hpp>

#include <regex>
#include <string>
#include <vector>

namespace schema {

using json = nlohmann::json;

inline bool has_type(const json &v, const std::string &t) {
  if (t == "object") return v.is_object();
  if (t == "array") return v.is_array();
  if (t == "string") return v.is_string();
  if (t == "boolean") return v.is_boolean();
  if (t == "null") return v.is_null();
  if (t == "integer") return v.is_number_integer();
  if (t == "number") return v.is_number();
  return false;
}

inline void validate(const json &v, const json &s, const std::string &at,
                     std::vector<std::string> &errors) {
  if (s.contains("type")) {
    bool ok = false;
    if (s["type"].is_array()) {
      for (const auto &t : s["type"]) ok = ok || has_type(v, t.get<std::string>());
    } else {
      ok = has_type(v, s["type"].get<std::string>());
    }
    if (!ok) {
      errors.push_back(at + ": wrong type");
      return;
    }
  }
  if (s.contains("enum")) {
    bool ok = false;
    for (const auto &e : s["enum"]) ok = ok || e == v;
    if (!ok) errors.push_back(at + ": value not in enum");
  }
  if (s.contains("minimum") && v.is_number() && v.get<double>() < s["minimum"].get<double>())
    errors.push_back(at + ": below minimum");
  if (s.contains("pattern") && v.is_string() &&
      !std::regex_search(v.get<std::string>(), std::regex(s["pattern"].get<std::string>())))
    errors.push_back(at + ": pattern mismatch");
  if (v.is_object()) {
    if (s.contains("required"))
      for (const auto &r : s["required"])
        if (!v.contains(r.get<std::string>())) errors.push_back(at + ": missing " + r.get<std::string>());
    if (s.contains("properties"))
      for (const auto &[k, sub] : s["properties"].items())
        if (v.contains(k)) validate(v[k], sub, at + "/" + k, errors);
  }
  if (v.is_array() && s.contains("items"))
    for (std::size_t i = 0; i < v.size(); ++i)
      validate(v[i], s["items"], at + "/" + std::to_string(i), errors);
}

inline std::vector<std::string> validate(const json &v, const json &s) {
  std::vector<std::string> errors;
  validate(v, s, "", errors);
  return errors;
}

}  // namespace schema

#endif  // GLRU_TESTS_SCHEMA_CHECK_HPP
