// SPDX-License-Identifier: Apache-2.0
// Map specification files: a JSON document listing the elementary factors,
//   {"factors": [{"p": [c0, c1, ...], "a": [re, im]}, ...]}
// Coefficients are numbers (real) or [re, im] pairs. Every CLI subcommand
// and module consumes maps through this reader.

#pragma once

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "henonlab/map.hpp"

namespace henonlab {

struct MapParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

namespace mapfile_detail {

inline C parse_complex(const nlohmann::json& j, const std::string& where) {
  if (j.is_number()) return C(j.get<double>(), 0.0);
  if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number())
    return C(j[0].get<double>(), j[1].get<double>());
  throw MapParseError(where + ": expected number or [re, im]");
}

}  // namespace mapfile_detail

inline HenonMap map_from_json(const nlohmann::json& doc) {
  if (!doc.is_object() || !doc.contains("factors") || !doc["factors"].is_array() ||
      doc["factors"].empty())
    throw MapParseError("map file: expected object with nonempty \"factors\" array");
  std::vector<HenonFactor> factors;
  int idx = 0;
  for (const auto& jf : doc["factors"]) {
    std::string where = "factors[" + std::to_string(idx) + "]";
    if (!jf.is_object() || !jf.contains("p") || !jf.contains("a"))
      throw MapParseError(where + ": expected {\"p\": [...], \"a\": ...}");
    if (!jf["p"].is_array() || jf["p"].size() < 3)
      throw MapParseError(where + ".p: need at least 3 coefficients (deg >= 2)");
    std::vector<C> coeffs;
    int ci = 0;
    for (const auto& jc : jf["p"])
      coeffs.push_back(
          mapfile_detail::parse_complex(jc, where + ".p[" + std::to_string(ci++) + "]"));
    C a = mapfile_detail::parse_complex(jf["a"], where + ".a");
    try {
      factors.emplace_back(Polynomial{std::move(coeffs)}, a);
    } catch (const std::invalid_argument& e) {
      throw MapParseError(where + ": " + e.what());
    }
    ++idx;
  }
  try {
    return HenonMap(std::move(factors));
  } catch (const std::invalid_argument& e) {
    throw MapParseError(std::string("map file: ") + e.what());
  }
}

inline HenonMap map_from_string(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw MapParseError(std::string("map file: ") + e.what());
  }
  return map_from_json(doc);
}

inline HenonMap map_from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw MapParseError("map file: cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return map_from_string(ss.str());
}

inline nlohmann::json map_to_json(const HenonMap& map) {
  nlohmann::json doc;
  doc["factors"] = nlohmann::json::array();
  for (const auto& f : map.factors()) {
    nlohmann::json jf;
    jf["p"] = nlohmann::json::array();
    for (const C& c : f.p.coeffs()) jf["p"].push_back({c.real(), c.imag()});
    jf["a"] = {f.a.real(), f.a.imag()};
    doc["factors"].push_back(jf);
  }
  return doc;
}

/// The certified horseshoe parameters used throughout the test batteries:
/// single factor p(y) = y^2 - 10, a = 1.
inline HenonMap standard_map() {
  return HenonMap({HenonFactor(Polynomial{C(-10.0), C(0.0), C(1.0)}, C(1.0))});
}

}  // namespace henonlab
