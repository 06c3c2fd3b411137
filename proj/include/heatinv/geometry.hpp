// SPDX-FileCopyrightText: Copyright (c) 2026 The heatinv authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "heatinv/errors.hpp"

namespace heatinv {

// Pad used for closed-rectangle membership so grid nodes that land on a
// source edge up to roundoff still count as inside.
inline constexpr double kGeomTol = 1e-12;

struct Point2 {
  double x = 0.0;  // m
  double y = 0.0;  // m
};

// Axis-aligned rectangular heat source. Intensities are per-area densities
// (W/m^2): `rated` is the nominal design power known to the inversion,
// `actual` is the operating power it tries to recover.
struct HeatSource {
  Point2 center;
  double width = 0.0;   // m
  double height = 0.0;  // m
  double rated_intensity = 0.0;   // W/m^2
  double true_intensity = 0.0;    // W/m^2

  bool contains(const Point2& p) const {
    return std::abs(p.x - center.x) <= 0.5 * width + kGeomTol &&
           std::abs(p.y - center.y) <= 0.5 * height + kGeomTol;
  }
};

enum class BcKind { Dirichlet, Neumann, Robin };

struct BoundaryCondition {
  BcKind kind = BcKind::Dirichlet;
  double T0 = 0.0;      // K, Dirichlet/Robin
  double h_conv = 0.0;  // W/(m^2 K), Robin only
};

// One piece of an edge, parameterized by the coordinate that varies along
// the edge (x on bottom/top, y on left/right), in meters.
struct EdgeSegment {
  double from = 0.0;
  double to = 0.0;
  BoundaryCondition bc;
};

enum class Edge : int { Bottom = 0, Right = 1, Top = 2, Left = 3 };

inline const char* edge_name(Edge e) {
  switch (e) {
    case Edge::Bottom: return "bottom";
    case Edge::Right: return "right";
    case Edge::Top: return "top";
    case Edge::Left: return "left";
  }
  return "?";
}

struct DomainSpec {
  double Lx = 0.1;            // m
  double Ly = 0.1;            // m
  double conductivity = 1.0;  // W/(m K)
  std::vector<HeatSource> sources;
  // Segments per edge, indexed by Edge; each list tiles [0, edge length].
  std::array<std::vector<EdgeSegment>, 4> boundaries;

  double edge_length(Edge e) const {
    return (e == Edge::Bottom || e == Edge::Top) ? Lx : Ly;
  }

  bool inside(const Point2& p) const {
    return p.x >= -kGeomTol && p.x <= Lx + kGeomTol && p.y >= -kGeomTol && p.y <= Ly + kGeomTol;
  }

  // Boundary condition at position t along edge e. Segments tile the edge,
  // so this always resolves; shared endpoints go to the earlier segment.
  const BoundaryCondition& bc_at(Edge e, double t) const {
    const auto& segs = boundaries[static_cast<int>(e)];
    for (const auto& s : segs) {
      if (t >= s.from - kGeomTol && t <= s.to + kGeomTol) return s.bc;
    }
    return segs.back().bc;
  }
};

// Index of the unique source whose closed rectangle contains p, or -1.
inline int source_index_at(const DomainSpec& spec, const Point2& p) {
  for (std::size_t j = 0; j < spec.sources.size(); ++j) {
    if (spec.sources[j].contains(p)) return static_cast<int>(j);
  }
  return -1;
}

// Piecewise-constant operating intensity field (W/m^2).
inline double intensity_at(const DomainSpec& spec, const Point2& p) {
  if (!spec.inside(p)) {
    throw validation_error("intensity_at: point (" + std::to_string(p.x) + ", " +
                           std::to_string(p.y) + ") outside domain");
  }
  const int j = source_index_at(spec, p);
  return j < 0 ? 0.0 : spec.sources[static_cast<std::size_t>(j)].true_intensity;
}

namespace detail {

inline void validate_edge(const DomainSpec& spec, Edge e) {
  const auto& segs = spec.boundaries[static_cast<int>(e)];
  const double len = spec.edge_length(e);
  const std::string name = edge_name(e);
  if (segs.empty()) throw validation_error("boundary '" + name + "': no segments");
  double cursor = 0.0;
  for (const auto& s : segs) {
    if (s.to <= s.from) throw validation_error("boundary '" + name + "': empty or reversed segment");
    if (s.from < -kGeomTol || s.to > len + kGeomTol)
      throw validation_error("boundary '" + name + "': segment endpoints off the edge");
    if (std::abs(s.from - cursor) > 1e-9)
      throw validation_error("boundary '" + name + "': segments must tile the edge without gaps");
    if ((s.bc.kind == BcKind::Dirichlet || s.bc.kind == BcKind::Robin) && !std::isfinite(s.bc.T0))
      throw validation_error("boundary '" + name + "': T0 must be finite");
    if (s.bc.kind == BcKind::Robin && !(s.bc.h_conv > 0))
      throw validation_error("boundary '" + name + "': Robin h_conv must be > 0");
    cursor = s.to;
  }
  if (std::abs(cursor - len) > 1e-9)
    throw validation_error("boundary '" + name + "': segments must reach the edge end");
}

// Geometry and boundary-segment invariants, without the Neumann-anchoring
// check (assembly reports that one as a singularity instead).
inline void validate_geometry(const DomainSpec& spec) {
  if (!(spec.Lx > 0) || !(spec.Ly > 0)) throw validation_error("plate dimensions must be positive");
  if (!(spec.conductivity > 0)) throw validation_error("conductivity must be positive");
  for (std::size_t j = 0; j < spec.sources.size(); ++j) {
    const auto& s = spec.sources[j];
    const std::string tag = "source " + std::to_string(j);
    if (!(s.width > 0) || !(s.height > 0)) throw validation_error(tag + ": size must be positive");
    if (s.rated_intensity < 0 || s.true_intensity < 0)
      throw validation_error(tag + ": intensities must be >= 0");
    if (s.center.x - 0.5 * s.width < -kGeomTol || s.center.x + 0.5 * s.width > spec.Lx + kGeomTol ||
        s.center.y - 0.5 * s.height < -kGeomTol || s.center.y + 0.5 * s.height > spec.Ly + kGeomTol)
      throw validation_error(tag + ": rectangle extends outside the domain");
  }
  // Disjoint closed rectangles keep the node-in-source indicator unambiguous.
  for (std::size_t a = 0; a < spec.sources.size(); ++a) {
    for (std::size_t b = a + 1; b < spec.sources.size(); ++b) {
      const auto& p = spec.sources[a];
      const auto& q = spec.sources[b];
      const bool sep_x = p.center.x + 0.5 * p.width + 1e-9 < q.center.x - 0.5 * q.width ||
                         q.center.x + 0.5 * q.width + 1e-9 < p.center.x - 0.5 * p.width;
      const bool sep_y = p.center.y + 0.5 * p.height + 1e-9 < q.center.y - 0.5 * q.height ||
                         q.center.y + 0.5 * q.height + 1e-9 < p.center.y - 0.5 * p.height;
      if (!sep_x && !sep_y)
        throw validation_error("sources " + std::to_string(a) + " and " + std::to_string(b) +
                               " overlap or touch");
    }
  }
  for (const Edge e : {Edge::Bottom, Edge::Right, Edge::Top, Edge::Left}) validate_edge(spec, e);
}

}  // namespace detail

// Checks all DomainSpec invariants; throws validation_error on the first one
// violated.
inline void validate(const DomainSpec& spec) {
  detail::validate_geometry(spec);
  // A pure-Neumann problem is singular: require a Dirichlet or Robin piece.
  bool anchored = false;
  for (const auto& segs : spec.boundaries) {
    for (const auto& s : segs) {
      if (s.bc.kind != BcKind::Neumann) anchored = true;
    }
  }
  if (!anchored)
    throw validation_error("all boundaries are Neumann; the steady problem is singular");
}

enum class CasePreset { Case1 = 1, Case2 = 2, Case3 = 3 };

// Builds one of the three standard 0.1 m x 0.1 m plate configurations around
// a caller-supplied source layout:
//   Case1 - all four edges isothermal at 298 K,
//   Case2 - bottom isothermal at 298 K, other edges adiabatic,
//   Case3 - adiabatic everywhere except a centered 0.01 m heat-sink patch at
//           298 K on the bottom edge.
inline DomainSpec case_preset(CasePreset id, std::vector<HeatSource> layout) {
  DomainSpec spec;
  spec.Lx = 0.1;
  spec.Ly = 0.1;
  spec.conductivity = 1.0;
  spec.sources = std::move(layout);

  const BoundaryCondition iso{BcKind::Dirichlet, 298.0, 0.0};
  const BoundaryCondition adiabatic{BcKind::Neumann, 0.0, 0.0};
  const auto whole = [&](Edge e, const BoundaryCondition& bc) {
    spec.boundaries[static_cast<int>(e)] = {EdgeSegment{0.0, spec.edge_length(e), bc}};
  };

  switch (id) {
    case CasePreset::Case1:
      for (const Edge e : {Edge::Bottom, Edge::Right, Edge::Top, Edge::Left}) whole(e, iso);
      break;
    case CasePreset::Case2:
      whole(Edge::Bottom, iso);
      for (const Edge e : {Edge::Right, Edge::Top, Edge::Left}) whole(e, adiabatic);
      break;
    case CasePreset::Case3: {
      const double half_sink = 0.005;
      const double mid = 0.5 * spec.Lx;
      spec.boundaries[static_cast<int>(Edge::Bottom)] = {
          EdgeSegment{0.0, mid - half_sink, adiabatic},
          EdgeSegment{mid - half_sink, mid + half_sink, iso},
          EdgeSegment{mid + half_sink, spec.Lx, adiabatic},
      };
      for (const Edge e : {Edge::Right, Edge::Top, Edge::Left}) whole(e, adiabatic);
      break;
    }
  }
  validate(spec);
  return spec;
}

}  // namespace heatinv
