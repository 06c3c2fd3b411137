// SPDX-FileCopyrightText: Copyright (c) 2026 The heatinv authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "heatinv/config.hpp"
#include "heatinv/errors.hpp"
#include "heatinv/evaluation.hpp"
#include "heatinv/fd.hpp"
#include "heatinv/inversion.hpp"
#include "heatinv/placement.hpp"
#include "heatinv/rng.hpp"
#include "heatinv/sampling.hpp"

// Pipeline plumbing shared by the command-line tool and the test suites:
// candidate-pool construction, manifest fingerprinting, result-bundle
// layout, and the forward / place / invert / sweep / metrics commands.
namespace heatinv::harness {

namespace fs = std::filesystem;
using nlohmann::json;

// ---------------------------------------------------------------------------
// manifests

inline std::string manifest_hash(const json& manifest) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(fnv1a(manifest.dump())));
  return buf;
}

// Writes manifest.json into the run directory. Rerunning the same manifest
// is allowed (results are deterministic); a differing manifest aimed at the
// same directory is refused instead of silently overwriting.
inline std::string stamp_manifest(const fs::path& out_dir, const json& manifest) {
  fs::create_directories(out_dir);
  const std::string hash = manifest_hash(manifest);
  const fs::path path = out_dir / "manifest.json";
  if (fs::exists(path)) {
    std::ifstream in(path);
    json existing;
    try {
      in >> existing;
    } catch (const json::exception&) {
      existing = json::object();
    }
    if (existing.value("hash", "") != hash)
      throw io_error("output directory '" + out_dir.string() +
                     "' holds results of a different manifest; refusing to overwrite");
  }
  json stamped = manifest;
  stamped["hash"] = hash;
  std::ofstream out(path);
  out << stamped.dump(2) << "\n";
  return hash;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open '" + path + "'");
  std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return content;
}

// ---------------------------------------------------------------------------
// train-config serialization

inline json train_config_to_json(const TrainConfig& cfg) {
  return json{{"weights", {cfg.weights.pde, cfg.weights.bc, cfg.weights.data}},
              {"iterations", cfg.iterations},
              {"learning_rate", cfg.learning_rate},
              {"collocation", {cfg.collocation_interior, cfg.collocation_per_edge}},
              {"residual_unit", cfg.residual_unit},
              {"seed", cfg.seed},
              {"hidden", cfg.hidden},
              {"init", cfg.init == InitScheme::Transfer ? "transfer" : "xavier"}};
}

inline TrainConfig train_config_from_json(const json& j) {
  TrainConfig cfg;
  if (j.contains("weights")) {
    const auto w = j.at("weights").get<std::vector<double>>();
    if (w.size() != 3) throw validation_error("train.weights needs [pde, bc, data]");
    cfg.weights = {w[0], w[1], w[2]};
  }
  cfg.iterations = j.value("iterations", cfg.iterations);
  cfg.learning_rate = j.value("learning_rate", cfg.learning_rate);
  if (j.contains("collocation")) {
    const auto c = j.at("collocation").get<std::vector<int>>();
    if (c.size() != 2) throw validation_error("train.collocation needs [interior, per_edge]");
    cfg.collocation_interior = c[0];
    cfg.collocation_per_edge = c[1];
  }
  cfg.residual_unit = j.value("residual_unit", cfg.residual_unit);
  cfg.seed = j.value("seed", cfg.seed);
  if (j.contains("hidden")) cfg.hidden = j.at("hidden").get<std::vector<int>>();
  if (j.contains("init")) {
    const std::string init = j.at("init").get<std::string>();
    if (init == "transfer")
      cfg.init = InitScheme::Transfer;
    else if (init == "xavier")
      cfg.init = InitScheme::Xavier;
    else
      throw validation_error("train.init must be 'transfer' or 'xavier'");
  }
  cfg.check();
  return cfg;
}

// ---------------------------------------------------------------------------
// candidate pools

// Candidate position sets for placement ranking. LHS candidates draw fresh
// seeds from the manifest seed, LDS candidates take consecutive blocks of
// the Halton sequence, GS candidates drop different fill centers.
inline std::vector<PositionSet> build_candidates(const DomainSpec& spec, int n_sensors,
                                                 int per_sampler,
                                                 const std::vector<std::string>& samplers,
                                                 std::uint64_t seed) {
  std::vector<PositionSet> pool;
  for (const std::string& sampler : samplers) {
    for (int i = 0; i < per_sampler; ++i) {
      if (sampler == "lhs") {
        pool.push_back(lhs_sample(n_sensors, spec, substream(seed, "pool-lhs", i)));
      } else if (sampler == "lds") {
        pool.push_back(lds_sample(n_sensors, spec, static_cast<std::uint64_t>(i) * n_sensors));
      } else if (sampler == "gs") {
        pool.push_back(gs_candidate(n_sensors, spec, substream(seed, "pool-gs", i)));
      } else {
        throw validation_error("unknown sampler '" + sampler + "' (use lhs, lds or gs)");
      }
    }
  }
  return pool;
}

inline PositionSet sample_sensors(const DomainSpec& spec, const std::string& sampler, int n,
                                  std::uint64_t seed) {
  if (sampler == "lhs") return lhs_sample(n, spec, substream(seed, "sensors-lhs"));
  if (sampler == "lds") return lds_sample(n, spec);
  if (sampler == "gs") return gs_candidate(n, spec, substream(seed, "sensors-gs"));
  throw validation_error("unknown sampler '" + sampler + "' (use lhs, lds or gs)");
}

// ---------------------------------------------------------------------------
// forward

struct ForwardArgs {
  std::string spec_path;
  int K = 50;
  std::string out_path = "field.txt";
  bool rated = false;  // solve with rated instead of operating intensities
};

inline ScalarField cmd_forward(const ForwardArgs& args) {
  const DomainSpec spec = load_domain_config(args.spec_path);
  const CoefficientSystem sys = assemble(spec, args.K);
  const ScalarField field =
      solve_forward(sys, args.rated ? rated_intensities(spec) : true_intensities(spec));
  save_field(field, args.out_path);
  return field;
}

// ---------------------------------------------------------------------------
// place

struct PlaceArgs {
  std::string spec_path;
  int K = 50;
  int n_sensors = 42;
  int per_sampler = 50;
  std::vector<std::string> samplers = {"lhs", "lds", "gs"};
  std::uint64_t seed = 0;
  double lambda = 1.0;
  std::string out_dir = "place_out";
};

struct PlaceResult {
  PlacementCandidate winner;
  std::vector<RankingEntry> ranking;  // sorted by kappa ascending
  std::string hash;
};

inline PlaceResult cmd_place(const PlaceArgs& args) {
  const DomainSpec spec = load_domain_config(args.spec_path);
  const json manifest = {{"command", "place"},         {"spec", read_file(args.spec_path)},
                         {"K", args.K},                {"n_sensors", args.n_sensors},
                         {"per_sampler", args.per_sampler}, {"samplers", args.samplers},
                         {"seed", args.seed},          {"lambda", args.lambda}};

  PlaceResult result;
  result.hash = stamp_manifest(args.out_dir, manifest);

  const CoefficientSystem sys = assemble(spec, args.K);
  const std::vector<PositionSet> pool =
      build_candidates(spec, args.n_sensors, args.per_sampler, args.samplers, args.seed);
  result.winner = select_positions(pool, sys, args.lambda, &result.ranking);

  std::stable_sort(result.ranking.begin(), result.ranking.end(),
                   [](const RankingEntry& a, const RankingEntry& b) { return a.kappa < b.kappa; });

  const fs::path dir(args.out_dir);
  {
    std::ofstream csv(dir / "ranking.csv");
    csv << "candidate_id,provenance,n_obs,kappa\n";
    char buf[64];
    for (const auto& row : result.ranking) {
      std::snprintf(buf, sizeof(buf), "%.9g", row.kappa);
      csv << row.candidate_id << ',' << provenance_name(row.provenance) << ',' << row.n_obs << ','
          << buf << "\n";
    }
  }
  save_positions(result.winner.positions, (dir / "optimal_positions.csv").string());
  {
    json placement = {{"hash", result.hash},
                      {"kappa", result.winner.kappa},
                      {"provenance", provenance_name(result.winner.positions.provenance)},
                      {"n_obs", result.winner.selection.rows()},
                      {"positions", json::array()}};
    for (const auto& p : result.winner.positions.points)
      placement["positions"].push_back({p.x, p.y});
    std::ofstream out(dir / "placement.json");
    out << placement.dump(2) << "\n";
  }
  return result;
}

// ---------------------------------------------------------------------------
// invert

struct InvertArgs {
  std::string spec_path;
  int K = 50;
  std::string sensors_path;       // CSV of sensor positions
  double noise_eps = 0.0;
  std::uint64_t seed = 0;
  TrainConfig train;
  std::string out_dir = "invert_out";
  std::string pretrained_path;    // optional checkpoint; made if missing
  bool linear = false;            // least-squares reconstruction instead of the network
};

struct InvertOutcome {
  MetricReport metrics;
  Eigen::VectorXd phi_hat;
  std::string run_id;
};

inline void append_metrics_row(const fs::path& path, const std::string& run_id,
                               const MetricReport& m) {
  const bool fresh = !fs::exists(path);
  std::ofstream csv(path, std::ios::app);
  if (fresh) csv << "run_id,mae,cmae,bmae,mcae\n";
  char buf[128];
  std::snprintf(buf, sizeof(buf), "%s,%.9g,%.9g,%.9g,%.9g", run_id.c_str(), m.mae, m.cmae, m.bmae,
                m.mcae);
  csv << buf << "\n";
}

// Pretrained parameters for a spec/config pair, cached on disk so sweeps and
// repeat inversions reuse one model-initialization run per case.
inline NetParams pretrained_for(const DomainSpec& spec, const TrainConfig& cfg,
                                const std::string& cache_path, std::ostream* log = nullptr) {
  if (!cache_path.empty() && fs::exists(cache_path)) return load_checkpoint(cache_path);
  if (log) *log << "pretraining (" << cfg.iterations << " iterations)...\n";
  NetParams params = pretrain(spec, cfg);
  if (!cache_path.empty()) {
    fs::create_directories(fs::path(cache_path).parent_path().empty()
                               ? fs::path(".")
                               : fs::path(cache_path).parent_path());
    save_checkpoint(params, cache_path);
  }
  return params;
}

inline InvertOutcome cmd_invert(const InvertArgs& args, std::ostream* log = nullptr) {
  const DomainSpec spec = load_domain_config(args.spec_path);
  const PositionSet sensors = load_positions(args.sensors_path);
  const json manifest = {{"command", "invert"},
                         {"spec", read_file(args.spec_path)},
                         {"K", args.K},
                         {"sensors", read_file(args.sensors_path)},
                         {"noise_eps", args.noise_eps},
                         {"seed", args.seed},
                         {"linear", args.linear},
                         {"train", train_config_to_json(args.train)}};

  const fs::path dir(args.out_dir);
  InvertOutcome outcome;
  outcome.run_id = stamp_manifest(dir, manifest);

  const CoefficientSystem sys = assemble(spec, args.K);
  const ScalarField truth = solve_forward(sys, true_intensities(spec));
  save_field(truth, (dir / "truth.txt").string());

  ScalarField reconstructed;
  if (args.linear) {
    SelectionMatrix sel = selection_from_positions(sensors, sys.grid, sys.n_sources());
    Eigen::VectorXd obs(sel.rows());
    for (int i = 0; i < sel.rows(); ++i) obs[i] = truth.values[sel.node[i]];
    obs = add_noise(obs, args.noise_eps, substream(args.seed, "noise"));
    const AugmentedSystem aug = augment(sys, sel, obs, 1.0);
    Reconstruction rec = least_squares_reconstruct(aug);
    reconstructed = rec.temperature;
    outcome.phi_hat = rec.intensities;
  } else {
    Eigen::VectorXd obs = observations_from_field(truth, sensors);
    obs = add_noise(obs, args.noise_eps, substream(args.seed, "noise"));

    TrainConfig cfg = args.train;
    NetParams initial;
    if (cfg.init == InitScheme::Transfer) {
      initial = pretrained_for(spec, cfg, args.pretrained_path, log);
    } else {
      initial = init_xavier(cfg.widths(), substream(cfg.seed, "init"),
                            Normalization::for_domain(spec));
    }
    if (log) *log << "inverting (" << cfg.iterations << " iterations)...\n";
    InversionResult res = invert(spec, initial, sensors, obs, cfg);
    save_checkpoint(res.params, (dir / "checkpoint.txt").string());
    {
      std::ofstream hist(dir / "loss_history.csv");
      hist << "iter,total,pde,bc,data\n";
      char buf[160];
      for (const auto& row : res.history) {
        std::snprintf(buf, sizeof(buf), "%d,%.9g,%.9g,%.9g,%.9g", row.iteration, row.total,
                      row.pde, row.bc, row.data);
        hist << buf << "\n";
      }
    }
    reconstructed = evaluate_on_grid(res.params, spec, args.K);
    outcome.phi_hat = res.phi_hat;
  }

  save_field(reconstructed, (dir / "field.txt").string());
  {
    std::ofstream phi(dir / "phi_hat.csv");
    phi << "source,phi_rated,phi_true,phi_hat\n";
    char buf[160];
    for (int j = 0; j < outcome.phi_hat.size(); ++j) {
      std::snprintf(buf, sizeof(buf), "%d,%.9g,%.9g,%.9g", j, spec.sources[j].rated_intensity,
                    spec.sources[j].true_intensity, outcome.phi_hat[j]);
      phi << buf << "\n";
    }
  }
  outcome.metrics = metrics(reconstructed, truth, spec);
  append_metrics_row(dir / "metrics.csv", outcome.run_id, outcome.metrics);
  return outcome;
}

// ---------------------------------------------------------------------------
// sweep

struct SweepPlan {
  std::string spec_path;
  int K = 50;
  std::vector<int> sensor_counts = {42};
  std::vector<std::string> samplers = {"lds"};
  std::vector<double> noise_levels = {0.0};
  std::vector<std::uint64_t> seeds = {0};
  TrainConfig train;
  bool linear = false;
};

inline SweepPlan load_plan(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw io_error("'" + path + "': invalid JSON: " + e.what());
  }
  SweepPlan plan;
  if (!j.contains("spec")) throw validation_error("plan: missing key 'spec'");
  plan.spec_path = j.at("spec").get<std::string>();
  plan.K = j.value("K", plan.K);
  if (j.contains("sensor_counts")) plan.sensor_counts = j.at("sensor_counts").get<std::vector<int>>();
  if (j.contains("samplers")) plan.samplers = j.at("samplers").get<std::vector<std::string>>();
  if (j.contains("noise_levels")) plan.noise_levels = j.at("noise_levels").get<std::vector<double>>();
  if (j.contains("seeds")) plan.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
  if (j.contains("train")) plan.train = train_config_from_json(j.at("train"));
  plan.linear = j.value("linear", false);
  if (plan.sensor_counts.empty() || plan.samplers.empty() || plan.noise_levels.empty() ||
      plan.seeds.empty())
    throw validation_error("plan: sensor_counts, samplers, noise_levels and seeds must be nonempty");
  return plan;
}

struct SweepCell {
  int n_sensors;
  std::string sampler;
  double eps;
  std::uint64_t seed;
  std::string name;
};

inline std::vector<SweepCell> plan_cells(const SweepPlan& plan) {
  std::vector<SweepCell> cells;
  for (const int n : plan.sensor_counts)
    for (const std::string& sampler : plan.samplers)
      for (const double eps : plan.noise_levels)
        for (const std::uint64_t seed : plan.seeds) {
          char name[128];
          std::snprintf(name, sizeof(name), "n%d_%s_eps%g_seed%llu", n, sampler.c_str(), eps,
                        static_cast<unsigned long long>(seed));
          cells.push_back({n, sampler, eps, seed, name});
        }
  return cells;
}

// Runs every cell of the plan; cells that already produced metrics are
// skipped, failures are recorded per cell and do not stop the sweep.
// Returns the number of failed cells.
inline int cmd_sweep(const SweepPlan& plan, const std::string& out_dir,
                     std::ostream* log = nullptr) {
  const DomainSpec spec = load_domain_config(plan.spec_path);
  json manifest = {{"command", "sweep"},
                   {"spec", read_file(plan.spec_path)},
                   {"K", plan.K},
                   {"sensor_counts", plan.sensor_counts},
                   {"samplers", plan.samplers},
                   {"noise_levels", plan.noise_levels},
                   {"seeds", plan.seeds},
                   {"linear", plan.linear},
                   {"train", train_config_to_json(plan.train)}};
  const fs::path dir(out_dir);
  const std::string hash = stamp_manifest(dir, manifest);

  // one shared pretraining checkpoint per plan (spec and train config fixed)
  const std::string cache =
      plan.linear ? std::string()
                  : (dir / ("pretrain_" + hash + ".ckpt")).string();

  int failures = 0;
  for (const SweepCell& cell : plan_cells(plan)) {
    const fs::path cell_dir = dir / "cells" / cell.name;
    if (fs::exists(cell_dir / "metrics.csv")) {
      if (log) *log << cell.name << ": already done, skipping\n";
      continue;
    }
    try {
      const PositionSet sensors =
          sample_sensors(spec, cell.sampler, cell.n_sensors, substream(cell.seed, "sampler"));
      fs::create_directories(cell_dir);
      const fs::path sensors_path = cell_dir / "sensors.csv";
      save_positions(sensors, sensors_path.string());

      InvertArgs args;
      args.spec_path = plan.spec_path;
      args.K = plan.K;
      args.sensors_path = sensors_path.string();
      args.noise_eps = cell.eps;
      args.seed = cell.seed;
      args.train = plan.train;
      args.out_dir = cell_dir.string();
      args.pretrained_path = cache;
      args.linear = plan.linear;
      const InvertOutcome outcome = cmd_invert(args, log);
      append_metrics_row(dir / "results.csv", cell.name, outcome.metrics);
      if (log) *log << cell.name << ": mae " << outcome.metrics.mae << "\n";
    } catch (const std::exception& e) {
      ++failures;
      fs::create_directories(cell_dir);
      std::ofstream err(cell_dir / "error.txt");
      err << e.what() << "\n";
      if (log) *log << cell.name << ": FAILED: " << e.what() << "\n";
    }
  }
  return failures;
}

// ---------------------------------------------------------------------------
// metrics

struct MetricsArgs {
  std::string pred_path;
  std::string truth_path;
  std::string spec_path;
  std::string run_id = "run";
  std::string out_path;  // optional CSV to append to
};

inline MetricReport cmd_metrics(const MetricsArgs& args) {
  const DomainSpec spec = load_domain_config(args.spec_path);
  const ScalarField pred = load_field(args.pred_path);
  const ScalarField truth = load_field(args.truth_path);
  const MetricReport m = metrics(pred, truth, spec);
  if (!args.out_path.empty()) append_metrics_row(args.out_path, args.run_id, m);
  return m;
}

}  // namespace heatinv::harness
