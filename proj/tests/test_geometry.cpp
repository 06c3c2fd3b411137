// SPDX-FileCopyrightText: Copyright (c) 2026 The heatinv authors
// SPDX-License-Identifier: Apache-2.0
#include <catch2/catch_amalgamated.hpp>

#include <heatinv/config.hpp>
#include <heatinv/fd.hpp>
#include <heatinv/geometry.hpp>
#include <heatinv/rng.hpp>

using namespace heatinv;

namespace {

std::vector<HeatSource> small_layout() {
  return {
      {{0.03, 0.03}, 0.02, 0.02, 10000.0, 12000.0},
      {{0.07, 0.06}, 0.016, 0.012, 8000.0, 7000.0},
  };
}

}  // namespace

TEST_CASE("intensity_at picks the containing source") {
  DomainSpec spec = case_preset(CasePreset::Case1, small_layout());
  CHECK(intensity_at(spec, {0.03, 0.03}) == 12000.0);
  CHECK(intensity_at(spec, {0.001, 0.001}) == 0.0);
  CHECK_THROWS_AS(intensity_at(spec, {0.2, 0.05}), validation_error);
}

TEST_CASE("points on a source edge belong to the source") {
  DomainSpec spec = case_preset(CasePreset::Case1, small_layout());
  const HeatSource& s = spec.sources[0];
  // membership oracle: all four edge midpoints of the closed rectangle
  const Point2 mids[4] = {{s.center.x, s.center.y - s.height / 2},
                          {s.center.x, s.center.y + s.height / 2},
                          {s.center.x - s.width / 2, s.center.y},
                          {s.center.x + s.width / 2, s.center.y}};
  for (const Point2& p : mids) CHECK(intensity_at(spec, p) == s.true_intensity);
}

TEST_CASE("intensity field is piecewise constant") {
  DomainSpec spec = case_preset(CasePreset::Case1, small_layout());
  Rng rng(11);
  const HeatSource& s = spec.sources[0];
  for (int t = 0; t < 50; ++t) {
    const Point2 p{rng.uniform(s.center.x - s.width / 2, s.center.x + s.width / 2),
                   rng.uniform(s.center.y - s.height / 2, s.center.y + s.height / 2)};
    const double margin = std::min({p.x - (s.center.x - s.width / 2), (s.center.x + s.width / 2) - p.x,
                              p.y - (s.center.y - s.height / 2), (s.center.y + s.height / 2) - p.y});
    if (margin <= 0) continue;
    const double base = intensity_at(spec, p);
    const double d = 0.9 * margin;
    CHECK(intensity_at(spec, {p.x + d, p.y}) == base);
    CHECK(intensity_at(spec, {p.x - d, p.y}) == base);
    CHECK(intensity_at(spec, {p.x, p.y + d}) == base);
  }
}

TEST_CASE("grid sum of intensity matches total source power") {
  DomainSpec spec = case_preset(CasePreset::Case1, small_layout());
  const int K = 101;
  const double h = spec.Lx / (K - 1);
  double grid_sum = 0.0;
  for (int r = 0; r < K; ++r)
    for (int c = 0; c < K; ++c) grid_sum += intensity_at(spec, {c * h, r * h}) * h * h;
  double exact = 0.0;
  double edge_budget = 0.0;
  for (const auto& s : spec.sources) {
    exact += s.true_intensity * s.width * s.height;
    edge_budget += s.true_intensity * 2.0 * (s.width + s.height) * h;
  }
  CHECK(std::abs(grid_sum - exact) <= edge_budget);
}

TEST_CASE("case presets define the paper's boundary layouts") {
  DomainSpec c1 = case_preset(CasePreset::Case1, small_layout());
  for (const auto& segs : c1.boundaries) {
    REQUIRE(segs.size() == 1);
    CHECK(segs[0].bc.kind == BcKind::Dirichlet);
    CHECK(segs[0].bc.T0 == 298.0);
  }

  DomainSpec c2 = case_preset(CasePreset::Case2, small_layout());
  CHECK(c2.boundaries[static_cast<int>(Edge::Bottom)][0].bc.kind == BcKind::Dirichlet);
  CHECK(c2.boundaries[static_cast<int>(Edge::Top)][0].bc.kind == BcKind::Neumann);
  CHECK(c2.boundaries[static_cast<int>(Edge::Left)][0].bc.kind == BcKind::Neumann);
  CHECK(c2.boundaries[static_cast<int>(Edge::Right)][0].bc.kind == BcKind::Neumann);

  DomainSpec c3 = case_preset(CasePreset::Case3, small_layout());
  const auto& bottom = c3.boundaries[static_cast<int>(Edge::Bottom)];
  REQUIRE(bottom.size() == 3);
  CHECK(bottom[1].from == Catch::Approx(0.045));
  CHECK(bottom[1].to == Catch::Approx(0.055));
  CHECK(bottom[1].bc.kind == BcKind::Dirichlet);
  CHECK(bottom[1].bc.T0 == 298.0);
  CHECK(bottom[0].bc.kind == BcKind::Neumann);
  CHECK(bottom[2].bc.kind == BcKind::Neumann);
  CHECK(c1.conductivity == 1.0);
}

TEST_CASE("case preset is deterministic") {
  DomainSpec a = case_preset(CasePreset::Case3, small_layout());
  DomainSpec b = case_preset(CasePreset::Case3, small_layout());
  REQUIRE(a.sources.size() == b.sources.size());
  for (std::size_t i = 0; i < a.sources.size(); ++i) {
    CHECK(a.sources[i].center.x == b.sources[i].center.x);
    CHECK(a.sources[i].true_intensity == b.sources[i].true_intensity);
  }
  for (int e = 0; e < 4; ++e) {
    REQUIRE(a.boundaries[e].size() == b.boundaries[e].size());
    for (std::size_t s = 0; s < a.boundaries[e].size(); ++s) {
      CHECK(a.boundaries[e][s].from == b.boundaries[e][s].from);
      CHECK(a.boundaries[e][s].bc.kind == b.boundaries[e][s].bc.kind);
    }
  }
}

TEST_CASE("empty layout with case 2 solves to uniform 298 K") {
  DomainSpec spec = case_preset(CasePreset::Case2, {});
  CoefficientSystem sys = assemble(spec, 15);
  ScalarField T = solve_forward(sys, Eigen::VectorXd::Zero(0));
  CHECK((T.values.array() - 298.0).abs().maxCoeff() < 1e-9);
}

TEST_CASE("validation rejects bad layouts") {
  // overlapping sources
  CHECK_THROWS_AS(case_preset(CasePreset::Case1,
                              {{{0.03, 0.03}, 0.02, 0.02, 1.0, 1.0},
                               {{0.04, 0.03}, 0.02, 0.02, 1.0, 1.0}}),
                  validation_error);
  // source sticking out of the plate
  CHECK_THROWS_AS(case_preset(CasePreset::Case1, {{{0.005, 0.05}, 0.02, 0.02, 1.0, 1.0}}),
                  validation_error);
  // negative intensity
  CHECK_THROWS_AS(case_preset(CasePreset::Case1, {{{0.05, 0.05}, 0.02, 0.02, -1.0, 1.0}}),
                  validation_error);
  // zero-size source
  CHECK_THROWS_AS(case_preset(CasePreset::Case1, {{{0.05, 0.05}, 0.0, 0.02, 1.0, 1.0}}),
                  validation_error);

  // all-Neumann spec is singular
  DomainSpec bad;
  for (int e = 0; e < 4; ++e)
    bad.boundaries[e] = {EdgeSegment{0.0, bad.edge_length(static_cast<Edge>(e)),
                                     BoundaryCondition{BcKind::Neumann, 0.0, 0.0}}};
  CHECK_THROWS_AS(validate(bad), validation_error);

  // segments must tile the edge
  DomainSpec gap = case_preset(CasePreset::Case1, {});
  gap.boundaries[0] = {EdgeSegment{0.0, 0.03, BoundaryCondition{BcKind::Dirichlet, 298.0, 0.0}},
                       EdgeSegment{0.05, 0.1, BoundaryCondition{BcKind::Dirichlet, 298.0, 0.0}}};
  CHECK_THROWS_AS(validate(gap), validation_error);
}

TEST_CASE("config loader reads the reference layout") {
  DomainSpec spec = load_domain_config(std::string(HEATINV_CONFIG_DIR) + "/reference_case1.json");
  CHECK(spec.Lx == 0.1);
  CHECK(spec.sources.size() == 9);
  CHECK(spec.sources[0].rated_intensity == 60000.0);
  CHECK(spec.sources[0].true_intensity == 66000.0);
  for (const auto& segs : spec.boundaries) CHECK(segs[0].bc.kind == BcKind::Dirichlet);

  DomainSpec c3 = load_domain_config(std::string(HEATINV_CONFIG_DIR) + "/reference_case3.json");
  CHECK(c3.boundaries[static_cast<int>(Edge::Bottom)].size() == 3);
}

TEST_CASE("config errors name the offending key") {
  using nlohmann::json;
  const json good = {
      {"plate", {{"Lx", 0.1}, {"Ly", 0.1}}},
      {"case", 1},
      {"sources", json::array({{{"center", {0.05, 0.05}}, {"size", {0.02, 0.02}}, {"rated", 1.0}, {"true", 1.0}}})},
  };
  CHECK_NOTHROW(parse_domain_config(good));

  json missing = good;
  missing["plate"].erase("Lx");
  CHECK_THROWS_WITH(parse_domain_config(missing), Catch::Matchers::ContainsSubstring("plate.Lx"));

  json badtype = good;
  badtype["plate"]["Ly"] = "wide";
  CHECK_THROWS_WITH(parse_domain_config(badtype), Catch::Matchers::ContainsSubstring("plate.Ly"));

  json badsource = good;
  badsource["sources"][0].erase("rated");
  CHECK_THROWS_WITH(parse_domain_config(badsource),
                    Catch::Matchers::ContainsSubstring("sources[0].rated"));

  json both = good;
  both["boundaries"] = json::object();
  CHECK_THROWS_WITH(parse_domain_config(both),
                    Catch::Matchers::ContainsSubstring("'case' or 'boundaries'"));

  json badcase = good;
  badcase["case"] = 7;
  CHECK_THROWS_WITH(parse_domain_config(badcase), Catch::Matchers::ContainsSubstring("case"));
}

TEST_CASE("explicit boundary config with Robin segment") {
  using nlohmann::json;
  json root = {
      {"plate", {{"Lx", 0.1}, {"Ly", 0.1}}},
      {"sources", json::array()},
      {"boundaries",
       {{"bottom", json::array({{{"kind", "dirichlet"}, {"T0", 300.0}}})},
        {"top", json::array({{{"kind", "robin"}, {"T0", 295.0}, {"h_conv", 12.5}}})},
        {"left", json::array({{{"kind", "neumann"}}})},
        {"right", json::array({{{"kind", "neumann"}}})}}},
  };
  DomainSpec spec = parse_domain_config(root);
  const auto& top = spec.boundaries[static_cast<int>(Edge::Top)][0];
  CHECK(top.bc.kind == BcKind::Robin);
  CHECK(top.bc.h_conv == 12.5);
  CHECK(top.bc.T0 == 295.0);

  root["boundaries"]["top"][0].erase("h_conv");
  CHECK_THROWS_WITH(parse_domain_config(root),
                    Catch::Matchers::ContainsSubstring("boundaries.top[0].h_conv"));
}
