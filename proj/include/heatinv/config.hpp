// SPDX-FileCopyrightText: Copyright (c) 2026 The heatinv authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "heatinv/errors.hpp"
#include "heatinv/geometry.hpp"

namespace heatinv {

namespace detail {

using nlohmann::json;

inline const json& require(const json& obj, const std::string& key, const std::string& path) {
  if (!obj.is_object() || !obj.contains(key))
    throw validation_error("config: missing key '" + path + key + "'");
  return obj.at(key);
}

template <typename T>
T as(const json& value, const std::string& path) {
  try {
    return value.get<T>();
  } catch (const json::exception&) {
    throw validation_error("config: key '" + path + "' has the wrong type");
  }
}

inline BoundaryCondition parse_bc(const json& seg, const std::string& path) {
  BoundaryCondition bc;
  const std::string kind = as<std::string>(require(seg, "kind", path + "."), path + ".kind");
  if (kind == "dirichlet") {
    bc.kind = BcKind::Dirichlet;
    bc.T0 = as<double>(require(seg, "T0", path + "."), path + ".T0");
  } else if (kind == "neumann") {
    bc.kind = BcKind::Neumann;
  } else if (kind == "robin") {
    bc.kind = BcKind::Robin;
    bc.T0 = as<double>(require(seg, "T0", path + "."), path + ".T0");
    bc.h_conv = as<double>(require(seg, "h_conv", path + "."), path + ".h_conv");
  } else {
    throw validation_error("config: key '" + path + ".kind' must be dirichlet, neumann or robin");
  }
  return bc;
}

inline std::vector<EdgeSegment> parse_edge(const json& list, double edge_len,
                                           const std::string& path) {
  if (!list.is_array() || list.empty())
    throw validation_error("config: key '" + path + "' must be a nonempty array of segments");
  std::vector<EdgeSegment> segs;
  for (std::size_t i = 0; i < list.size(); ++i) {
    const json& seg = list.at(i);
    const std::string spath = path + "[" + std::to_string(i) + "]";
    EdgeSegment s;
    s.from = seg.contains("from") ? as<double>(seg.at("from"), spath + ".from") : 0.0;
    s.to = seg.contains("to") ? as<double>(seg.at("to"), spath + ".to") : edge_len;
    s.bc = parse_bc(seg, spath);
    segs.push_back(s);
  }
  return segs;
}

}  // namespace detail

// Loads a domain description from JSON. Schema (meters, Kelvin, W/m^2):
//   {
//     "plate": {"Lx": 0.1, "Ly": 0.1, "conductivity": 1.0},
//     "case": 1,                 // boundary preset 1|2|3, or instead:
//     "boundaries": {"bottom": [ {"kind": "dirichlet", "T0": 298.0,
//                                 "from": 0.0, "to": 0.1} ], ...},
//     "sources": [ {"center": [x, y], "size": [w, h],
//                   "rated": 60000.0, "true": 66000.0}, ... ]
//   }
// Segments default to the whole edge; every parse error names the key.
inline DomainSpec parse_domain_config(const nlohmann::json& root) {
  using detail::as;
  using detail::require;

  DomainSpec spec;
  const auto& plate = require(root, "plate", "");
  spec.Lx = as<double>(require(plate, "Lx", "plate."), "plate.Lx");
  spec.Ly = as<double>(require(plate, "Ly", "plate."), "plate.Ly");
  spec.conductivity = plate.contains("conductivity")
                          ? as<double>(plate.at("conductivity"), "plate.conductivity")
                          : 1.0;

  const auto& sources = require(root, "sources", "");
  if (!sources.is_array()) throw validation_error("config: key 'sources' must be an array");
  for (std::size_t i = 0; i < sources.size(); ++i) {
    const auto& s = sources.at(i);
    const std::string path = "sources[" + std::to_string(i) + "]";
    const auto center = as<std::vector<double>>(require(s, "center", path + "."), path + ".center");
    const auto size = as<std::vector<double>>(require(s, "size", path + "."), path + ".size");
    if (center.size() != 2) throw validation_error("config: key '" + path + ".center' needs [x, y]");
    if (size.size() != 2) throw validation_error("config: key '" + path + ".size' needs [w, h]");
    HeatSource src;
    src.center = {center[0], center[1]};
    src.width = size[0];
    src.height = size[1];
    src.rated_intensity = as<double>(require(s, "rated", path + "."), path + ".rated");
    src.true_intensity = as<double>(require(s, "true", path + "."), path + ".true");
    spec.sources.push_back(src);
  }

  const bool has_case = root.contains("case");
  const bool has_bounds = root.contains("boundaries");
  if (has_case == has_bounds)
    throw validation_error("config: exactly one of 'case' or 'boundaries' must be given");
  if (has_case) {
    const int id = as<int>(root.at("case"), "case");
    if (id < 1 || id > 3) throw validation_error("config: key 'case' must be 1, 2 or 3");
    return case_preset(static_cast<CasePreset>(id), spec.sources);
  }

  const auto& bounds = root.at("boundaries");
  const char* names[4] = {"bottom", "right", "top", "left"};
  for (int e = 0; e < 4; ++e) {
    const std::string path = std::string("boundaries.") + names[e];
    spec.boundaries[e] = detail::parse_edge(require(bounds, names[e], "boundaries."),
                                            spec.edge_length(static_cast<Edge>(e)), path);
  }
  validate(spec);
  return spec;
}

inline DomainSpec load_domain_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open '" + path + "'");
  nlohmann::json root;
  try {
    in >> root;
  } catch (const nlohmann::json::exception& e) {
    throw io_error("'" + path + "': invalid JSON: " + e.what());
  }
  return parse_domain_config(root);
}

}  // namespace heatinv
