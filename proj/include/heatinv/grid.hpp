// SPDX-FileCopyrightText: Copyright (c) 2026 The heatinv authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Core>
#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include "heatinv/errors.hpp"
#include "heatinv/geometry.hpp"

namespace heatinv {

// Uniform K x K node grid covering the closed plate. Nodes are numbered
// left to right, bottom to top: linear index = row * K + col, 0-based, with
// row 0 the bottom edge.
struct Grid {
  int K = 0;
  double h = 0.0;  // node spacing, m

  Grid() = default;
  Grid(int K_, double Lx) : K(K_), h(Lx / (K_ - 1)) {
    if (K_ < 3) throw validation_error("grid needs K >= 3");
  }

  int nodes() const { return K * K; }

  Point2 node(int row, int col) const { return {col * h, row * h}; }
  int row_of(int index) const { return index / K; }
  int col_of(int index) const { return index % K; }

  bool on_boundary(int row, int col) const {
    return row == 0 || col == 0 || row == K - 1 || col == K - 1;
  }
};

inline int grid_index(int row, int col, int K) {
  if (row < 0 || col < 0 || row >= K || col >= K)
    throw index_error("grid_index: (" + std::to_string(row) + ", " + std::to_string(col) +
                      ") out of range for K=" + std::to_string(K));
  return row * K + col;
}

// Temperature values (K) on the grid, stored in node order.
struct ScalarField {
  Grid grid;
  Eigen::VectorXd values;

  double at(int row, int col) const { return values[grid_index(row, col, grid.K)]; }

  // Bilinear interpolation at a physical point inside the grid's extent.
  double interpolate(const Point2& p) const {
    const double gx = p.x / grid.h;
    const double gy = p.y / grid.h;
    const int c0 = std::clamp(static_cast<int>(gx), 0, grid.K - 2);
    const int r0 = std::clamp(static_cast<int>(gy), 0, grid.K - 2);
    const double ax = std::clamp(gx - c0, 0.0, 1.0);
    const double ay = std::clamp(gy - r0, 0.0, 1.0);
    return at(r0, c0) * (1 - ax) * (1 - ay) + at(r0, c0 + 1) * ax * (1 - ay) +
           at(r0 + 1, c0) * (1 - ax) * ay + at(r0 + 1, c0 + 1) * ax * ay;
  }
};

// Field file format: a header line `K=<K> h=<h>`, then K rows of K
// comma-separated Kelvin values, bottom grid row first. Values are printed
// with 17 significant digits so a write/read round trip is bitwise exact.
inline void save_field(const ScalarField& field, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw io_error("cannot open '" + path + "' for writing");
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", field.grid.h);
  out << "K=" << field.grid.K << " h=" << buf << "\n";
  for (int r = 0; r < field.grid.K; ++r) {
    for (int c = 0; c < field.grid.K; ++c) {
      std::snprintf(buf, sizeof(buf), "%.17g", field.at(r, c));
      out << buf << (c + 1 == field.grid.K ? "\n" : ",");
    }
  }
  if (!out) throw io_error("failed writing '" + path + "'");
}

inline ScalarField load_field(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open '" + path + "'");
  std::string header;
  std::getline(in, header);
  int K = 0;
  double h = 0.0;
  if (std::sscanf(header.c_str(), "K=%d h=%lf", &K, &h) != 2 || K < 3)
    throw io_error("'" + path + "': bad field header '" + header + "'");
  ScalarField field;
  field.grid.K = K;
  field.grid.h = h;
  field.values.resize(K * K);
  std::string line;
  for (int r = 0; r < K; ++r) {
    if (!std::getline(in, line)) throw io_error("'" + path + "': truncated at row " + std::to_string(r));
    std::stringstream ss(line);
    std::string cell;
    for (int c = 0; c < K; ++c) {
      if (!std::getline(ss, cell, ','))
        throw io_error("'" + path + "': row " + std::to_string(r) + " has fewer than K values");
      field.values[grid_index(r, c, K)] = std::stod(cell);
    }
  }
  return field;
}

}  // namespace heatinv
