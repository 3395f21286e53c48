#pragma once

// Law serialization and locale-independent number formatting.

#include <array>
#include <charconv>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "gwlimits/error.hpp"
#include "gwlimits/offspring.hpp"

namespace gwlimits {

/// Shortest round-trip decimal form; '.' separator regardless of locale.
inline std::string format_number(double x) {
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  if (std::isnan(x)) return "nan";
  std::array<char, 64> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), x);
  return std::string(buf.data(), res.ptr);
}

/// JSON number, or the strings "inf"/"-inf" (JSON has no infinity).
inline nlohmann::json json_number(double x) {
  if (std::isfinite(x)) return x;
  return format_number(x);
}

/// {"probs": [p_0, p_1, ...]}
inline OffspringLaw law_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("probs") || !j["probs"].is_array())
    throw Error(Errc::ParseError, "law JSON must be an object with a \"probs\" array");
  std::vector<double> masses;
  for (const auto& x : j["probs"]) {
    if (!x.is_number()) throw Error(Errc::ParseError, "law JSON: non-numeric mass");
    masses.push_back(x.get<double>());
  }
  return make_law(masses);
}

inline nlohmann::json law_to_json(const OffspringLaw& law) {
  nlohmann::json probs = nlohmann::json::array();
  for (double p : law.probs()) probs.push_back(p);
  return {{"probs", probs}};
}

inline OffspringLaw load_law_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::ParseError, "cannot open law file " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::ParseError, std::string("law file: ") + e.what());
  }
  return law_from_json(j);
}

/// Rows of doubles as CSV with a header line.
inline std::string to_csv(const std::vector<std::string>& header, const std::vector<std::vector<double>>& rows) {
  std::ostringstream out;
  for (std::size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
  out << '\n';
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << format_number(row[i]);
    out << '\n';
  }
  return out.str();
}

/// The same rows as a JSON array of objects.
inline nlohmann::json rows_to_json(const std::vector<std::string>& header, const std::vector<std::vector<double>>& rows) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& row : rows) {
    nlohmann::json obj = nlohmann::json::object();
    for (std::size_t i = 0; i < header.size() && i < row.size(); ++i) obj[header[i]] = json_number(row[i]);
    arr.push_back(obj);
  }
  return arr;
}

}  // namespace gwlimits
