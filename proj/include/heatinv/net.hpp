// SPDX-FileCopyrightText: Copyright (c) 2026 The heatinv authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Core>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "heatinv/errors.hpp"
#include "heatinv/geometry.hpp"
#include "heatinv/rng.hpp"

namespace heatinv {

// Input/output scaling of the surrogate. Physical coordinates map affinely
// onto [-1,1]^2 and the network's raw output tau parameterizes the
// temperature as T = t_offset + t_scale * tau, which keeps tanh layers in
// their well-conditioned range.
struct Normalization {
  double x0 = 0.0, x1 = 1.0;
  double y0 = 0.0, y1 = 1.0;
  double t_offset = 298.0;
  double t_scale = 50.0;

  Point2 to_unit(const Point2& p) const {
    return {2.0 * (p.x - x0) / (x1 - x0) - 1.0, 2.0 * (p.y - y0) / (y1 - y0) - 1.0};
  }
  double du_dx() const { return 2.0 / (x1 - x0); }
  double dv_dy() const { return 2.0 / (y1 - y0); }

  static Normalization for_domain(const DomainSpec& spec) {
    Normalization n;
    n.x1 = spec.Lx;
    n.y1 = spec.Ly;
    return n;
  }
};

// Fully connected tanh network; W[l] maps widths[l] -> widths[l+1] and the
// last layer is affine.
struct NetParams {
  std::vector<int> widths;
  std::vector<Eigen::MatrixXd> W;
  std::vector<Eigen::VectorXd> b;
  Normalization norm;

  int layers() const { return static_cast<int>(W.size()); }
};

inline void check_widths(const std::vector<int>& widths) {
  if (widths.size() < 2 || widths.front() != 2 || widths.back() != 1)
    throw validation_error("network widths must start at 2 and end at 1");
  for (const int w : widths)
    if (w < 1) throw validation_error("network widths must be positive");
}

// Xavier initialization: zero-mean normal entries with variance
// 2 / (fan_in + fan_out), zero biases.
inline NetParams init_xavier(const std::vector<int>& widths, std::uint64_t seed,
                             const Normalization& norm = {}) {
  check_widths(widths);
  NetParams p;
  p.widths = widths;
  p.norm = norm;
  Rng rng(substream(seed, "xavier-init"));
  for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
    const int fan_in = widths[l];
    const int fan_out = widths[l + 1];
    const double std_dev = std::sqrt(2.0 / (fan_in + fan_out));
    Eigen::MatrixXd W(fan_out, fan_in);
    for (int r = 0; r < fan_out; ++r)
      for (int c = 0; c < fan_in; ++c) W(r, c) = std_dev * rng.normal();
    p.W.push_back(std::move(W));
    p.b.push_back(Eigen::VectorXd::Zero(fan_out));
  }
  return p;
}

// Transfer initialization: verbatim copy of the source parameters.
inline NetParams init_transfer(const NetParams& source, const std::vector<int>& widths) {
  if (source.widths != widths)
    throw validation_error("transfer init: source widths do not match requested architecture");
  return source;
}

// Second-order jet: value plus first and second derivatives with respect to
// the two normalized inputs.
struct Jet2 {
  double value = 0.0;
  double dx = 0.0, dy = 0.0;
  double dxx = 0.0, dyy = 0.0;
};

// A batch of jets for one layer, stored as a single width x 5N matrix whose
// column blocks are [value | d/dx | d/dy | d2/dx2 | d2/dy2]. One matrix per
// layer means each affine transform is a single GEMM over all five slots.
struct JetBatch {
  Eigen::MatrixXd m;
  int n = 0;

  void resize(int width, int n_points) {
    n = n_points;
    m.resize(width, 5 * n_points);  // no-op when the shape is unchanged
  }
  int width() const { return static_cast<int>(m.rows()); }

  auto v() { return m.middleCols(0, n); }
  auto gx() { return m.middleCols(n, n); }
  auto gy() { return m.middleCols(2 * n, n); }
  auto hxx() { return m.middleCols(3 * n, n); }
  auto hyy() { return m.middleCols(4 * n, n); }
  auto v() const { return m.middleCols(0, n); }
  auto gx() const { return m.middleCols(n, n); }
  auto gy() const { return m.middleCols(2 * n, n); }
  auto hxx() const { return m.middleCols(3 * n, n); }
  auto hyy() const { return m.middleCols(4 * n, n); }
};

// Intermediates of one batched forward pass, reused across iterations so a
// training loop allocates only on the first call.
struct ForwardTrace {
  std::vector<JetBatch> act;  // act[0] = input jets, act[l] = post-activation of layer l
  std::vector<JetBatch> pre;  // pre[l] = affine output of layer l
  // backward-pass scratch
  std::vector<JetBatch> bar_scratch;
  Eigen::ArrayXXd s1, s2, s3;

  const JetBatch& output() const { return pre.back(); }
};

namespace detail {

inline void affine_jet(const Eigen::MatrixXd& W, const Eigen::VectorXd& b, const JetBatch& in,
                       JetBatch& out) {
  out.resize(static_cast<int>(W.rows()), in.n);
  out.m.noalias() = W * in.m;
  out.v().colwise() += b;
}

// tanh and its derivatives expressed through t = tanh(z):
// s1 = 1 - t^2, s2 = -2 t s1, s3 = -2 s1 (s1 - 2 t^2). The scale arrays are
// materialized once into caller-owned scratch instead of being recomputed
// lazily per slot.
inline void tanh_jet(const JetBatch& z, JetBatch& a, Eigen::ArrayXXd& s1, Eigen::ArrayXXd& s2) {
  a.resize(z.width(), z.n);
  a.v() = z.v().array().tanh().matrix();
  const auto t = a.v().array();
  s1 = 1.0 - t.square();
  s2 = -2.0 * t * s1;
  a.gx() = (s1 * z.gx().array()).matrix();
  a.gy() = (s1 * z.gy().array()).matrix();
  a.hxx() = (s2 * z.gx().array().square() + s1 * z.hxx().array()).matrix();
  a.hyy() = (s2 * z.gy().array().square() + s1 * z.hyy().array()).matrix();
}

}  // namespace detail

// Batched forward pass. `unit_points` is 2 x N in normalized coordinates;
// the trace's output() holds raw tau jets (1 x N per slot) with derivatives
// taken with respect to the normalized inputs.
inline void eval_jets(const NetParams& params, const Eigen::MatrixXd& unit_points,
                      ForwardTrace& trace) {
  const int n = static_cast<int>(unit_points.cols());
  trace.act.resize(params.layers());
  trace.pre.resize(params.layers());

  JetBatch& input = trace.act[0];
  input.resize(2, n);
  input.m.setZero();
  input.v() = unit_points;
  input.gx().row(0).setOnes();
  input.gy().row(1).setOnes();

  for (int l = 0; l < params.layers(); ++l) {
    detail::affine_jet(params.W[l], params.b[l], trace.act[l], trace.pre[l]);
    if (l + 1 < params.layers())
      detail::tanh_jet(trace.pre[l], trace.act[l + 1], trace.s1, trace.s2);
  }
}

inline ForwardTrace eval_jets(const NetParams& params, const Eigen::MatrixXd& unit_points) {
  ForwardTrace trace;
  eval_jets(params, unit_points, trace);
  return trace;
}

// Single-point evaluation at a normalized point. Returns the temperature
// jet: value in Kelvin (output parameterization applied), derivatives with
// respect to the normalized coordinates.
inline Jet2 eval_jet(const NetParams& params, const Point2& unit_p) {
  Eigen::MatrixXd x(2, 1);
  x << unit_p.x, unit_p.y;
  const ForwardTrace trace = eval_jets(params, x);
  const JetBatch& out = trace.output();
  const double s = params.norm.t_scale;
  return Jet2{params.norm.t_offset + s * out.v()(0, 0), s * out.gx()(0, 0), s * out.gy()(0, 0),
              s * out.hxx()(0, 0), s * out.hyy()(0, 0)};
}

// Gradients shaped like the parameters.
struct ParamGrads {
  std::vector<Eigen::MatrixXd> W;
  std::vector<Eigen::VectorXd> b;

  void set_zero_like(const NetParams& p) {
    if (W.size() != p.W.size()) {
      W.assign(p.W.size(), {});
      b.assign(p.b.size(), {});
    }
    for (int l = 0; l < p.layers(); ++l) {
      W[l].setZero(p.W[l].rows(), p.W[l].cols());
      b[l].setZero(p.b[l].size());
    }
  }

  bool all_finite() const {
    for (const auto& m : W)
      if (!m.allFinite()) return false;
    for (const auto& v : b)
      if (!v.allFinite()) return false;
    return true;
  }
};

// Reverse pass through a stored forward trace. `seed` carries the adjoints
// of the raw output jets (1 x N per slot); parameter gradients accumulate
// into `grads`. Uses the stored post-activation values, so the derivative
// chain matches the forward pass exactly.
inline void backprop_jets(const NetParams& params, ForwardTrace& trace, const JetBatch& seed,
                          ParamGrads& grads) {
  trace.bar_scratch.resize(params.layers() + 1);
  JetBatch* bar = &trace.bar_scratch[params.layers()];
  bar->resize(seed.width(), seed.n);
  bar->m = seed.m;

  for (int l = params.layers() - 1; l >= 0; --l) {
    const JetBatch& a_in = trace.act[l];
    grads.W[l].noalias() += bar->m * a_in.m.transpose();
    grads.b[l].noalias() += bar->v().rowwise().sum();
    if (l == 0) break;

    JetBatch& prev = trace.bar_scratch[l];  // adjoint of act[l] = tanh(pre[l-1])
    prev.resize(params.widths[l], bar->n);
    prev.m.noalias() = params.W[l].transpose() * bar->m;

    const JetBatch& z = trace.pre[l - 1];
    const auto t = trace.act[l].v().array();  // tanh(z.v), already computed forward
    trace.s1 = 1.0 - t.square();
    trace.s2 = -2.0 * t * trace.s1;
    trace.s3 = -2.0 * trace.s1 * (trace.s1 - 2.0 * t.square());
    const auto& s1 = trace.s1;
    const auto& s2 = trace.s2;
    const auto& s3 = trace.s3;

    // overwrite prev in place with the adjoint of z; v last since every
    // slot's contribution reads the post-activation adjoints
    prev.v() = (prev.v().array() * s1 + prev.gx().array() * s2 * z.gx().array() +
                prev.gy().array() * s2 * z.gy().array() +
                prev.hxx().array() * (s3 * z.gx().array().square() + s2 * z.hxx().array()) +
                prev.hyy().array() * (s3 * z.gy().array().square() + s2 * z.hyy().array()))
                   .matrix();
    prev.gx() = (prev.gx().array() * s1 + 2.0 * prev.hxx().array() * s2 * z.gx().array()).matrix();
    prev.gy() = (prev.gy().array() * s1 + 2.0 * prev.hyy().array() * s2 * z.gy().array()).matrix();
    prev.hxx() = (prev.hxx().array() * s1).matrix();
    prev.hyy() = (prev.hyy().array() * s1).matrix();
    bar = &prev;
  }
}

// Checkpoint format (plain text, 17 significant digits, round-trips
// bitwise):
//   heatinv-net v1
//   widths <w0> ... <wD>
//   norm <x0> <x1> <y0> <y1> <t_offset> <t_scale>
//   W<l> <rows> <cols> followed by one row per line
//   b<l> <size> followed by the entries on one line
inline void save_checkpoint(const NetParams& params, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw io_error("cannot open '" + path + "' for writing");
  out << "heatinv-net v1\n";
  out << "widths";
  for (const int w : params.widths) out << ' ' << w;
  out << '\n';
  char buf[64];
  const auto num = [&](double x) {
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return std::string(buf);
  };
  out << "norm " << num(params.norm.x0) << ' ' << num(params.norm.x1) << ' ' << num(params.norm.y0)
      << ' ' << num(params.norm.y1) << ' ' << num(params.norm.t_offset) << ' '
      << num(params.norm.t_scale) << '\n';
  for (int l = 0; l < params.layers(); ++l) {
    out << 'W' << l << ' ' << params.W[l].rows() << ' ' << params.W[l].cols() << '\n';
    for (int r = 0; r < params.W[l].rows(); ++r) {
      for (int c = 0; c < params.W[l].cols(); ++c)
        out << num(params.W[l](r, c)) << (c + 1 == params.W[l].cols() ? "\n" : " ");
    }
    out << 'b' << l << ' ' << params.b[l].size() << '\n';
    for (int i = 0; i < params.b[l].size(); ++i)
      out << num(params.b[l][i]) << (i + 1 == params.b[l].size() ? "\n" : " ");
  }
  if (!out) throw io_error("failed writing '" + path + "'");
}

inline NetParams load_checkpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open '" + path + "'");
  std::string line;
  std::getline(in, line);
  if (line != "heatinv-net v1") throw io_error("'" + path + "': unknown checkpoint format");

  NetParams p;
  std::getline(in, line);
  {
    std::stringstream ss(line);
    std::string tag;
    ss >> tag;
    if (tag != "widths") throw io_error("'" + path + "': expected widths line");
    int w;
    while (ss >> w) p.widths.push_back(w);
    check_widths(p.widths);
  }
  std::getline(in, line);
  {
    std::stringstream ss(line);
    std::string tag;
    ss >> tag >> p.norm.x0 >> p.norm.x1 >> p.norm.y0 >> p.norm.y1 >> p.norm.t_offset >>
        p.norm.t_scale;
    if (tag != "norm") throw io_error("'" + path + "': expected norm line");
  }
  for (std::size_t l = 0; l + 1 < p.widths.size(); ++l) {
    std::string tag;
    int rows, cols;
    in >> tag >> rows >> cols;
    if (tag != "W" + std::to_string(l)) throw io_error("'" + path + "': expected W" + std::to_string(l));
    Eigen::MatrixXd W(rows, cols);
    for (int r = 0; r < rows; ++r)
      for (int c = 0; c < cols; ++c) in >> W(r, c);
    p.W.push_back(std::move(W));
    int size;
    in >> tag >> size;
    if (tag != "b" + std::to_string(l)) throw io_error("'" + path + "': expected b" + std::to_string(l));
    Eigen::VectorXd b(size);
    for (int i = 0; i < size; ++i) in >> b[i];
    p.b.push_back(std::move(b));
    if (!in) throw io_error("'" + path + "': truncated checkpoint");
  }
  return p;
}

}  // namespace heatinv
