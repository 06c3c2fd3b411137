// SPDX-FileCopyrightText: Copyright (c) 2026 The heatinv authors
// SPDX-License-Identifier: Apache-2.0
#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <heatinv/fd.hpp>
#include <heatinv/inversion.hpp>
#include <heatinv/loss.hpp>
#include <heatinv/rng.hpp>

using namespace heatinv;

namespace {

DomainSpec test_spec() {
  return case_preset(CasePreset::Case3, {{{0.03, 0.03}, 0.02, 0.02, 10000.0, 12000.0},
                                         {{0.07, 0.07}, 0.02, 0.014, 8000.0, 7000.0}});
}

Batches small_batches(const DomainSpec& spec, std::uint64_t seed) {
  TrainConfig cfg;
  cfg.collocation_interior = 10;
  cfg.collocation_per_edge = 3;
  Batches b = collocation_sets(spec, cfg, seed);
  b.data_points = {{0.03, 0.04}, {0.06, 0.08}, {0.03, 0.03}};
  b.data_values = Eigen::VectorXd(3);
  b.data_values << 300.0, 305.0, 310.0;
  return b;
}

}  // namespace

TEST_CASE("a flat network on a zero-source domain has zero loss") {
  DomainSpec spec = case_preset(CasePreset::Case1, {{{0.05, 0.05}, 0.02, 0.02, 0.0, 0.0}});
  NetParams p = init_xavier({2, 4, 1}, 0, Normalization::for_domain(spec));
  for (auto& W : p.W) W.setZero();
  for (auto& b : p.b) b.setZero();
  // output is exactly t_offset = 298 K, matching the Case-1 boundary data

  TrainConfig cfg;
  cfg.collocation_interior = 20;
  cfg.collocation_per_edge = 5;
  Batches batches = collocation_sets(spec, cfg, 1);
  batches.data_points = {{0.02, 0.02}, {0.08, 0.05}};
  batches.data_values = Eigen::VectorXd::Constant(2, 298.0);

  const LossValue loss =
      loss_and_grads(p, Eigen::VectorXd::Zero(1), batches, LossWeights{1.0, 1.0, 1e4});
  CHECK(loss.pde == 0.0);
  CHECK(loss.bc == 0.0);
  CHECK(loss.data == 0.0);
  CHECK(loss.total == 0.0);
}

TEST_CASE("zero weights produce zero loss and gradients") {
  DomainSpec spec = test_spec();
  NetParams p = init_xavier({2, 6, 1}, 1, Normalization::for_domain(spec));
  Batches b = small_batches(spec, 2);
  ParamGrads g;
  Eigen::VectorXd gphi;
  const LossValue loss = loss_and_grads(p, rated_intensities(spec), b,
                                        LossWeights{0.0, 0.0, 0.0}, &g, &gphi);
  CHECK(loss.total == 0.0);
  for (const auto& W : g.W) CHECK(W.cwiseAbs().maxCoeff() == 0.0);
  CHECK(gphi.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("parameter gradients match central finite differences") {
  DomainSpec spec = test_spec();
  NetParams p = init_xavier({2, 8, 7, 1}, 42, Normalization::for_domain(spec));
  Batches b = small_batches(spec, 5);
  const Eigen::VectorXd phi = rated_intensities(spec);
  const LossWeights w{1.0, 1.0, 1e4};

  ParamGrads g;
  Eigen::VectorXd gphi;
  loss_and_grads(p, phi, b, w, &g, &gphi);
  const auto loss_of = [&](const NetParams& q) { return loss_and_grads(q, phi, b, w).total; };

  double worst = 0.0;
  for (int l = 0; l < p.layers(); ++l) {
    for (int r = 0; r < p.W[l].rows(); ++r)
      for (int c = 0; c < p.W[l].cols(); ++c) {
        NetParams p1 = p, p2 = p;
        const double h = 1e-6 * std::max(1.0, std::abs(p.W[l](r, c)));
        p1.W[l](r, c) += h;
        p2.W[l](r, c) -= h;
        const double fd = (loss_of(p1) - loss_of(p2)) / (2 * h);
        worst = std::max(worst, std::abs(fd - g.W[l](r, c)) / std::max(std::abs(g.W[l](r, c)), 1e-3));
      }
    for (int r = 0; r < p.b[l].size(); ++r) {
      NetParams p1 = p, p2 = p;
      p1.b[l](r) += 1e-6;
      p2.b[l](r) -= 1e-6;
      const double fd = (loss_of(p1) - loss_of(p2)) / 2e-6;
      worst = std::max(worst, std::abs(fd - g.b[l](r)) / std::max(std::abs(g.b[l](r)), 1e-3));
    }
  }
  INFO("worst parameter-gradient relative error " << worst);
  CHECK(worst < 1e-5);
}

TEST_CASE("intensity gradients match finite differences exactly") {
  DomainSpec spec = test_spec();
  NetParams p = init_xavier({2, 8, 1}, 7, Normalization::for_domain(spec));
  Batches b = small_batches(spec, 6);
  const LossWeights w{1.0, 1.0, 1e4};
  Eigen::VectorXd phi = rated_intensities(spec);

  ParamGrads g;
  Eigen::VectorXd gphi;
  loss_and_grads(p, phi, b, w, &g, &gphi);
  for (int j = 0; j < phi.size(); ++j) {
    Eigen::VectorXd p1 = phi, p2 = phi;
    const double h = 1e-2 * std::max(1.0, std::abs(phi[j]));
    p1[j] += h;
    p2[j] -= h;
    const double fd =
        (loss_and_grads(p, p1, b, w).total - loss_and_grads(p, p2, b, w).total) / (2 * h);
    CHECK(fd == Catch::Approx(gphi[j]).epsilon(1e-6));
  }
}

TEST_CASE("the data term never touches the intensities") {
  DomainSpec spec = test_spec();
  NetParams p = init_xavier({2, 8, 1}, 7, Normalization::for_domain(spec));
  Batches b = small_batches(spec, 6);
  ParamGrads g;
  Eigen::VectorXd gphi;
  loss_and_grads(p, rated_intensities(spec), b, LossWeights{0.0, 0.0, 1e4}, &g, &gphi);
  CHECK(gphi.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("loss is permutation invariant up to summation tolerance") {
  DomainSpec spec = test_spec();
  NetParams p = init_xavier({2, 10, 1}, 3, Normalization::for_domain(spec));
  Batches b = small_batches(spec, 9);
  const LossValue l1 = loss_and_grads(p, rated_intensities(spec), b, LossWeights{1, 1, 1e4});

  Batches shuffled = b;
  Rng rng(1);
  std::vector<std::size_t> perm(b.pde.size());
  for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = i;
  rng.shuffle(perm);
  for (std::size_t i = 0; i < perm.size(); ++i) {
    shuffled.pde[i] = b.pde[perm[i]];
    shuffled.pde_source[i] = b.pde_source[perm[i]];
  }
  const LossValue l2 =
      loss_and_grads(p, rated_intensities(spec), shuffled, LossWeights{1, 1, 1e4});
  CHECK(l2.total == Catch::Approx(l1.total).epsilon(1e-10));
}

TEST_CASE("loss is deterministic") {
  DomainSpec spec = test_spec();
  NetParams p = init_xavier({2, 10, 1}, 3, Normalization::for_domain(spec));
  Batches b = small_batches(spec, 9);
  ParamGrads g1, g2;
  Eigen::VectorXd gp1, gp2;
  const LossValue l1 = loss_and_grads(p, rated_intensities(spec), b, LossWeights{1, 1, 1e4}, &g1, &gp1);
  const LossValue l2 = loss_and_grads(p, rated_intensities(spec), b, LossWeights{1, 1, 1e4}, &g2, &gp2);
  CHECK(l1.total == l2.total);
  for (int l = 0; l < p.layers(); ++l) CHECK((g1.W[l] - g2.W[l]).cwiseAbs().maxCoeff() == 0.0);
  CHECK((gp1 - gp2).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("empty batches with nonzero weights are rejected") {
  DomainSpec spec = test_spec();
  NetParams p = init_xavier({2, 6, 1}, 1, Normalization::for_domain(spec));
  Batches b = small_batches(spec, 2);
  b.data_points.clear();
  b.data_values.resize(0);
  CHECK_THROWS_AS(loss_and_grads(p, rated_intensities(spec), b, LossWeights{1, 1, 1e4}),
                  validation_error);
  CHECK_NOTHROW(loss_and_grads(p, rated_intensities(spec), b, LossWeights{1, 1, 0.0}));

  Batches nobc = small_batches(spec, 2);
  nobc.bc.clear();
  CHECK_THROWS_AS(loss_and_grads(p, rated_intensities(spec), nobc, LossWeights{1, 1, 1e4}),
                  validation_error);
}
