// SPDX-FileCopyrightText: Copyright (c) 2026 The heatinv authors
// SPDX-License-Identifier: Apache-2.0
//
// Command-line front end: forward solves, sensor-placement ranking,
// field inversion from sparse observations, batch sweeps, and metrics.

#include <CLI11.hpp>
#include <cstdio>
#include <iostream>

#include <heatinv/harness.hpp>

using namespace heatinv;

int main(int argc, char** argv) {
  CLI::App app{"heatinv: temperature-field reconstruction from sparse sensors"};
  app.require_subcommand(1);

  harness::ForwardArgs fwd;
  CLI::App* forward = app.add_subcommand("forward", "solve the steady field with a FD oracle");
  forward->add_option("--spec", fwd.spec_path, "domain config (JSON)")->required();
  forward->add_option("--K", fwd.K, "grid nodes per side");
  forward->add_option("--out", fwd.out_path, "output field file");
  forward->add_flag("--rated", fwd.rated, "use rated instead of operating intensities");

  harness::PlaceArgs plc;
  CLI::App* place = app.add_subcommand("place", "rank sensor layouts by condition number");
  place->add_option("--spec", plc.spec_path, "domain config (JSON)")->required();
  place->add_option("--K", plc.K, "grid nodes per side");
  place->add_option("--sensors", plc.n_sensors, "sensors per candidate");
  place->add_option("--candidates", plc.per_sampler, "candidates per sampler");
  place->add_option("--samplers", plc.samplers, "samplers: lhs lds gs");
  place->add_option("--seed", plc.seed, "pool seed");
  place->add_option("--lambda", plc.lambda, "penalty weight");
  place->add_option("--out", plc.out_dir, "output directory")->required();

  harness::InvertArgs inv;
  double lr = inv.train.learning_rate;
  std::vector<double> weights = {inv.train.weights.pde, inv.train.weights.bc,
                                 inv.train.weights.data};
  std::string init = "transfer";
  CLI::App* invert = app.add_subcommand("invert", "reconstruct the field from observations");
  invert->add_option("--spec", inv.spec_path, "domain config (JSON)")->required();
  invert->add_option("--K", inv.K, "grid nodes per side");
  invert->add_option("--sensors", inv.sensors_path, "sensor positions CSV")->required();
  invert->add_option("--noise", inv.noise_eps, "multiplicative noise level");
  invert->add_option("--seed", inv.seed, "noise/init seed");
  invert->add_option("--iterations", inv.train.iterations, "training iterations");
  invert->add_option("--lr", lr, "learning rate");
  invert->add_option("--weights", weights, "loss weights: pde bc data");
  invert->add_option("--hidden", inv.train.hidden, "hidden layer widths");
  invert->add_option("--collocation", inv.train.collocation_interior, "interior collocation points");
  invert->add_option("--per-edge", inv.train.collocation_per_edge, "boundary points per edge");
  invert->add_option("--init", init, "initialization: transfer | xavier");
  invert->add_option("--pretrained", inv.pretrained_path, "pretrain checkpoint (made if missing)");
  invert->add_flag("--linear", inv.linear, "linear least-squares reconstruction");
  invert->add_option("--out", inv.out_dir, "output directory")->required();

  std::string plan_path, sweep_out;
  CLI::App* sweep = app.add_subcommand("sweep", "run a grid of inversion experiments");
  sweep->add_option("--plan", plan_path, "sweep plan (JSON)")->required();
  sweep->add_option("--out", sweep_out, "output directory")->required();

  harness::MetricsArgs met;
  CLI::App* metrics_cmd = app.add_subcommand("metrics", "compare a field against a truth field");
  metrics_cmd->add_option("--pred", met.pred_path, "predicted field file")->required();
  metrics_cmd->add_option("--truth", met.truth_path, "truth field file")->required();
  metrics_cmd->add_option("--spec", met.spec_path, "domain config (JSON)")->required();
  metrics_cmd->add_option("--run-id", met.run_id, "row label");
  metrics_cmd->add_option("--out", met.out_path, "CSV to append the row to");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*forward) {
      const ScalarField field = harness::cmd_forward(fwd);
      std::printf("wrote %s (K=%d, range [%.3f, %.3f] K)\n", fwd.out_path.c_str(), fwd.K,
                  field.values.minCoeff(), field.values.maxCoeff());
    } else if (*place) {
      const harness::PlaceResult result = harness::cmd_place(plc);
      std::printf("ranked %zu candidates; best kappa %.4f (%s), outputs in %s\n",
                  result.ranking.size(), result.winner.kappa,
                  provenance_name(result.winner.positions.provenance), plc.out_dir.c_str());
    } else if (*invert) {
      inv.train.learning_rate = lr;
      if (weights.size() != 3) throw validation_error("--weights needs pde bc data");
      inv.train.weights = {weights[0], weights[1], weights[2]};
      inv.train.init = init == "xavier" ? InitScheme::Xavier : InitScheme::Transfer;
      const harness::InvertOutcome out = harness::cmd_invert(inv, &std::cout);
      std::printf("run %s: mae %.4f cmae %.4f bmae %.4f mcae %.4f\n", out.run_id.c_str(),
                  out.metrics.mae, out.metrics.cmae, out.metrics.bmae, out.metrics.mcae);
    } else if (*sweep) {
      const harness::SweepPlan plan = harness::load_plan(plan_path);
      const int failures = harness::cmd_sweep(plan, sweep_out, &std::cout);
      if (failures > 0) {
        std::fprintf(stderr, "%d cell(s) failed\n", failures);
        return 1;
      }
      std::printf("sweep complete, results in %s/results.csv\n", sweep_out.c_str());
    } else if (*metrics_cmd) {
      const MetricReport m = harness::cmd_metrics(met);
      std::printf("%s,%.9g,%.9g,%.9g,%.9g\n", met.run_id.c_str(), m.mae, m.cmae, m.bmae, m.mcae);
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
