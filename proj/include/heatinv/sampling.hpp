// SPDX-FileCopyrightText: Copyright (c) 2026 The heatinv authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "heatinv/errors.hpp"
#include "heatinv/geometry.hpp"
#include "heatinv/rng.hpp"

namespace heatinv {

enum class Provenance { LHS, LDS, GS, Manual };

inline const char* provenance_name(Provenance p) {
  switch (p) {
    case Provenance::LHS: return "LHS";
    case Provenance::LDS: return "LDS";
    case Provenance::GS: return "GS";
    case Provenance::Manual: return "Manual";
  }
  return "?";
}

struct PositionSet {
  std::vector<Point2> points;
  Provenance provenance = Provenance::Manual;
  std::optional<std::uint64_t> seed;

  std::size_t size() const { return points.size(); }
};

inline void validate(const PositionSet& ps, const DomainSpec& spec) {
  for (std::size_t i = 0; i < ps.points.size(); ++i) {
    if (!spec.inside(ps.points[i]))
      throw validation_error("position " + std::to_string(i) + " outside domain");
    for (std::size_t j = i + 1; j < ps.points.size(); ++j) {
      const double dx = ps.points[i].x - ps.points[j].x;
      const double dy = ps.points[i].y - ps.points[j].y;
      if (dx * dx + dy * dy < 1e-18)
        throw validation_error("positions " + std::to_string(i) + " and " + std::to_string(j) +
                               " closer than 1e-9 m");
    }
  }
}

// Latin hypercube: each axis is split into n equal strata, every stratum is
// hit exactly once per axis, the point sits uniformly inside its stratum,
// and the x/y stratum pairing is a uniform random permutation.
inline PositionSet lhs_sample(int n, const DomainSpec& spec, std::uint64_t seed) {
  if (n < 1) throw validation_error("lhs_sample: n must be >= 1");
  Rng rng(seed);
  std::vector<int> sx(n), sy(n);
  std::iota(sx.begin(), sx.end(), 0);
  std::iota(sy.begin(), sy.end(), 0);
  rng.shuffle(sx);
  rng.shuffle(sy);
  PositionSet ps;
  ps.provenance = Provenance::LHS;
  ps.seed = seed;
  ps.points.reserve(n);
  for (int i = 0; i < n; ++i) {
    const double ux = rng.uniform();
    const double uy = rng.uniform();
    ps.points.push_back({(sx[i] + ux) / n * spec.Lx, (sy[i] + uy) / n * spec.Ly});
  }
  return ps;
}

// Radical-inverse (van der Corput) value of index i in the given base.
inline double radical_inverse(std::uint64_t i, int base) {
  double f = 1.0;
  double r = 0.0;
  while (i > 0) {
    f /= base;
    r += f * static_cast<double>(i % base);
    i /= base;
  }
  return r;
}

// First n points of the 2-D Halton sequence (bases 2 and 3, indices starting
// at 1) mapped onto the domain. `offset` skips ahead in the sequence; with
// offset 0 the set is a prefix of any longer one.
inline PositionSet lds_sample(int n, const DomainSpec& spec, std::uint64_t offset = 0) {
  if (n < 1) throw validation_error("lds_sample: n must be >= 1");
  PositionSet ps;
  ps.provenance = Provenance::LDS;
  ps.points.reserve(n);
  for (std::uint64_t i = 1 + offset; i <= offset + static_cast<std::uint64_t>(n); ++i) {
    ps.points.push_back({radical_inverse(i, 2) * spec.Lx, radical_inverse(i, 3) * spec.Ly});
  }
  return ps;
}

namespace detail {

// Cell of an N x N partition containing p. A point exactly on a gridline
// belongs to the upper-right cell; points on the far domain edge clamp to
// the last cell.
inline std::pair<int, int> gs_cell(const Point2& p, const DomainSpec& spec, int N) {
  const int cx = std::min(static_cast<int>(std::floor(p.x / (spec.Lx / N))), N - 1);
  const int cy = std::min(static_cast<int>(std::floor(p.y / (spec.Ly / N))), N - 1);
  return {std::max(cx, 0), std::max(cy, 0)};
}

}  // namespace detail

// Grid-based sampling: keeps the predefined points (component centers,
// engineer-chosen spots) and fills every empty cell of an N x N partition
// with its center.
inline PositionSet grid_sample(const DomainSpec& spec, const PositionSet& predefined, int N) {
  if (N < 1) throw validation_error("grid_sample: N must be >= 1");
  validate(predefined, spec);  // rejects duplicates and out-of-domain points

  std::set<std::pair<int, int>> occupied;
  for (const auto& p : predefined.points) occupied.insert(detail::gs_cell(p, spec, N));

  PositionSet out;
  out.provenance = Provenance::GS;
  out.points = predefined.points;
  for (int cy = 0; cy < N; ++cy) {
    for (int cx = 0; cx < N; ++cx) {
      if (!occupied.count({cx, cy}))
        out.points.push_back({(cx + 0.5) * spec.Lx / N, (cy + 0.5) * spec.Ly / N});
    }
  }
  return out;
}

inline PositionSet source_centers(const DomainSpec& spec) {
  PositionSet ps;
  ps.provenance = Provenance::Manual;
  for (const auto& s : spec.sources) ps.points.push_back(s.center);
  return ps;
}

// GS candidate with an exact point count, for pools that compare samplers at
// a fixed sensor budget: component centers plus the N x N fill with
// N = ceil(sqrt(n)), dropping a seeded random subset of the fill centers to
// land exactly on n points.
inline PositionSet gs_candidate(int n, const DomainSpec& spec, std::uint64_t seed) {
  if (n < 1) throw validation_error("gs_candidate: n must be >= 1");
  const PositionSet centers = source_centers(spec);
  if (static_cast<int>(centers.size()) > n)
    throw validation_error("gs_candidate: more sources than requested sensors");
  const int N = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(n))));
  PositionSet full = grid_sample(spec, centers, N);
  const std::size_t n_pred = centers.size();
  const std::size_t n_fill = full.size() - n_pred;
  const std::size_t excess = full.size() - static_cast<std::size_t>(n);
  if (excess > n_fill) throw validation_error("gs_candidate: cannot reach requested count");

  std::vector<std::size_t> fill_idx(n_fill);
  std::iota(fill_idx.begin(), fill_idx.end(), n_pred);
  Rng rng(substream(seed, "gs-drop"));
  rng.shuffle(fill_idx);
  std::set<std::size_t> drop(fill_idx.begin(), fill_idx.begin() + excess);

  PositionSet out;
  out.provenance = Provenance::GS;
  out.seed = seed;
  for (std::size_t i = 0; i < full.size(); ++i) {
    if (!drop.count(i)) out.points.push_back(full.points[i]);
  }
  return out;
}

// Randomized lower bound on the star discrepancy of the set, normalized to
// the unit square: max of |count/n - volume| over anchored boxes whose
// corners run over the coordinate grid of the sample (all x-coordinate /
// y-coordinate pairs, plus 1) and over `trials` random corners. Each box is
// counted both closed and open so corners sitting on points probe both
// sides. In 2-D the coordinate grid attains the supremum, but the contract
// stays "lower bound".
inline double discrepancy_estimate(const PositionSet& ps, const DomainSpec& spec, int trials,
                                   std::uint64_t seed) {
  if (ps.points.empty()) throw validation_error("discrepancy_estimate: empty position set");
  if (trials < 1) throw validation_error("discrepancy_estimate: trials must be >= 1");
  const double n = static_cast<double>(ps.points.size());

  std::vector<Point2> unit(ps.points.size());
  for (std::size_t i = 0; i < ps.points.size(); ++i)
    unit[i] = {ps.points[i].x / spec.Lx, ps.points[i].y / spec.Ly};

  const auto probe = [&](double cx, double cy) {
    int closed = 0;
    int open = 0;
    for (const auto& p : unit) {
      if (p.x <= cx && p.y <= cy) ++closed;
      if (p.x < cx && p.y < cy) ++open;
    }
    const double vol = cx * cy;
    return std::max(std::abs(closed / n - vol), std::abs(open / n - vol));
  };

  std::vector<double> xs(unit.size() + 1, 1.0), ys(unit.size() + 1, 1.0);
  for (std::size_t i = 0; i < unit.size(); ++i) {
    xs[i] = unit[i].x;
    ys[i] = unit[i].y;
  }
  double best = 0.0;
  for (const double cx : xs)
    for (const double cy : ys) best = std::max(best, probe(cx, cy));
  Rng rng(seed);
  for (int t = 0; t < trials; ++t) best = std::max(best, probe(rng.uniform(), rng.uniform()));
  return std::min(best, 1.0);
}

// CSV format: header `x_m,y_m`, one point per line, 9 significant digits.
inline void save_positions(const PositionSet& ps, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw io_error("cannot open '" + path + "' for writing");
  out << "x_m,y_m\n";
  char buf[64];
  for (const auto& p : ps.points) {
    std::snprintf(buf, sizeof(buf), "%.9g,%.9g", p.x, p.y);
    out << buf << "\n";
  }
}

inline PositionSet load_positions(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open '" + path + "'");
  std::string line;
  if (!std::getline(in, line) || line.rfind("x_m,y_m", 0) != 0)
    throw io_error("'" + path + "': expected header 'x_m,y_m'");
  PositionSet ps;
  ps.provenance = Provenance::Manual;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string a, b;
    if (!std::getline(ss, a, ',') || !std::getline(ss, b))
      throw io_error("'" + path + "': malformed line '" + line + "'");
    ps.points.push_back({std::stod(a), std::stod(b)});
  }
  return ps;
}

}  // namespace heatinv
