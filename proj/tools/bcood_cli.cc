// Copyright 2026 The bcood Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// bcood command line. Every flag can also be set from a TOML/INI file given
// with --config; flags on the command line win. Subcommand flags live in a
// section named after the subcommand, e.g.
//
//   [train]
//   space = "t2"
//   lambda = 150

#include <atomic>
#include <chrono>
#include <csignal>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "bcood/harness/collect.h"
#include "bcood/harness/dataset_io.h"
#include "bcood/harness/evaluate.h"
#include "bcood/harness/experiments.h"
#include "bcood/harness/heatmap.h"
#include "bcood/harness/teleop.h"
#include "bcood/hash.h"
#include "bcood/learn/checkpoint.h"
#include "json.hpp"

namespace fs = std::filesystem;
using namespace bcood;

namespace {

std::atomic<bool> g_interrupted{false};

void log_line(const std::string& s) { std::cerr << s << '\n'; }

SamplingManifold manifold_from(const std::string& name) {
  if (name == "in" || name == "in_dist") return SamplingManifold::in_distribution();
  if (name == "ood") return SamplingManifold::out_of_distribution();
  throw CLI::ValidationError("--manifold", "expected 'in' or 'ood', got '" + name + "'");
}

Dataset load_checked(const std::string& path, const SimConfig& cfg) {
  harness::DatasetFile f = harness::load_dataset(path);
  if (f.sim_config_hash != hex64(cfg.hash())) {
    log_line("warning: " + path + " was recorded with a different simulator configuration");
  }
  return f.dataset;
}

harness::EvalSpec eval_spec_from(const std::string& path) {
  if (path.empty()) return {};
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot read " + path);
  return harness::EvalSpec::from_json(nlohmann::ordered_json::parse(f));
}

struct TrainFlags {
  int epochs = 0;  // 0: kind default
  int hidden_dim = 0;
  int hidden_layers = -1;

  void add(CLI::App* app) {
    app->add_option("--epochs", epochs, "Training epochs (default: per policy kind)");
    app->add_option("--hidden-dim", hidden_dim, "Hidden width of the MLP policy");
    app->add_option("--hidden-layers", hidden_layers, "Hidden layers of the MLP policy");
  }
  harness::TrainSettings settings() const {
    harness::TrainSettings s;
    if (epochs > 0) {
      s.mlp_train.epochs = epochs;
      s.diffusion_train.epochs = epochs;
    }
    if (hidden_dim > 0) s.mlp.hidden_dim = hidden_dim;
    if (hidden_layers >= 0) s.mlp.hidden_layers = hidden_layers;
    return s;
  }
};

SpaceKind space_arg(const std::string& s) { return space_kind_from_string(s); }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"bcood: behaviour-cloning OOD workbench on a planar push task"};
  app.set_config("--config", "", "TOML/INI file with default flag values");
  app.require_subcommand(1);
  const SimConfig sim;
  const PushTEnv env(sim);

  // collect
  auto* collect = app.add_subcommand("collect", "Record scripted demonstrations");
  int n = 200;
  std::string manifold = "in";
  std::uint64_t seed = 0;
  std::string out;
  collect->add_option("--n", n, "Number of episodes")->check(CLI::PositiveNumber);
  collect->add_option("--manifold", manifold, "in | ood");
  collect->add_option("--seed", seed, "Base seed");
  collect->add_option("--out", out, "Dataset file (.jsonl)")->required();

  // teleop
  auto* teleop = app.add_subcommand("teleop", "Serve the teleoperation bridge");
  int port = 8765;
  std::string host = "127.0.0.1";
  teleop->add_option("--port", port, "TCP port");
  teleop->add_option("--host", host, "Bind address");
  teleop->add_option("--manifold", manifold, "in | ood");
  teleop->add_option("--seed", seed, "Base seed for episode initial states");
  teleop->add_option("--out", out, "Dataset file (.jsonl)")->required();

  // train
  auto* train = app.add_subcommand("train", "Train one policy");
  std::string dataset, space = "p", kind = "mlp";
  double lambda = harness::kDefaultLambda;
  TrainFlags tf;
  train->add_option("--dataset", dataset, "Dataset file")->required();
  train->add_option("--space", space, "p | t1 | t2");
  train->add_option("--lambda", lambda, "Projection radius for t2 (px)");
  train->add_option("--kind", kind, "mlp | diffusion");
  train->add_option("--seed", seed, "Training seed");
  train->add_option("--out", out, "Checkpoint file")->required();
  tf.add(train);

  // eval
  auto* eval = app.add_subcommand("eval", "Evaluate a checkpoint");
  std::string ckpt, spec_path;
  eval->add_option("--ckpt", ckpt, "Checkpoint file")->required();
  eval->add_option("--spec", spec_path, "EvalSpec JSON (default spec when omitted)");
  eval->add_option("--out", out, "Report file (.json); bins CSV is written alongside")
      ->required();

  // matrix
  auto* matrix = app.add_subcommand("matrix", "Train and evaluate every space x kind x seed");
  std::vector<std::uint64_t> seeds{0, 1, 2};
  std::vector<std::string> kinds{"mlp"};
  std::vector<std::string> spaces{"p", "t1", "t2"};
  std::string cache;
  matrix->add_option("--dataset", dataset, "Dataset file")->required();
  matrix->add_option("--seeds", seeds, "Training seeds");
  matrix->add_option("--kinds", kinds, "Policy kinds (mlp, diffusion)");
  matrix->add_option("--spaces", spaces, "Problem spaces");
  matrix->add_option("--lambda", lambda, "Projection radius for t2 (px)");
  matrix->add_option("--spec", spec_path, "EvalSpec JSON");
  matrix->add_option("--cache", cache, "Checkpoint cache directory");
  matrix->add_option("--out", out, "Output directory")->required();
  tf.add(matrix);

  // ablate-lambda
  auto* ablate = app.add_subcommand("ablate-lambda", "Sweep the projection radius");
  std::vector<double> lambdas{30.0, 150.0, 600.0};
  double selected = harness::kDefaultLambda;
  ablate->add_option("--dataset", dataset, "Dataset file")->required();
  ablate->add_option("--lambdas", lambdas, "Projection radii (px)");
  ablate->add_option("--seeds", seeds, "Training seeds");
  ablate->add_option("--selected", selected, "Radius marked in the plot");
  ablate->add_option("--spec", spec_path, "EvalSpec JSON");
  ablate->add_option("--cache", cache, "Checkpoint cache directory");
  ablate->add_option("--out", out, "Output directory")->required();
  tf.add(ablate);

  // heatmap
  auto* heat = app.add_subcommand("heatmap", "Interpolated reward map of a report");
  std::string report_path;
  heat->add_option("--report", report_path, "Report file")->required();
  heat->add_option("--out", out, "Output prefix (.csv and .svg are appended)")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*collect) {
      harness::CollectStats st;
      const Dataset d =
          harness::collect_scripted(env, n, manifold_from(manifold), seed, &st, log_line);
      harness::save_dataset(d, sim, out);
      std::printf("collected %d episodes (%zu steps, %d discarded), hash %s\n", n,
                  d.num_steps(), st.discarded, harness::dataset_hash(d).c_str());
    } else if (*teleop) {
      harness::TeleopOptions opt;
      opt.manifold = manifold_from(manifold);
      opt.base_seed = seed;
      opt.out_path = out;
      harness::TeleopSession session(env, opt, log_line);
      harness::TeleopServer server(session, opt.tick_hz, log_line);
      if (!server.start(host, port)) {
        std::fprintf(stderr, "cannot bind %s:%d\n", host.c_str(), port);
        return 1;
      }
      std::signal(SIGINT, [](int) { g_interrupted.store(true); });
      std::signal(SIGTERM, [](int) { g_interrupted.store(true); });
      std::printf("teleop bridge on http://%s:%d (GET /stream, POST /message)\n",
                  host.c_str(), server.port());
      std::fflush(stdout);
      while (!g_interrupted.load()) std::this_thread::sleep_for(std::chrono::milliseconds(100));
      server.stop();
      std::printf("session ended with %zu saved episodes\n", session.dataset().episodes.size());
    } else if (*train) {
      const Dataset d = load_checked(dataset, sim);
      const learn::PolicyKind pk = learn::policy_kind_from_string(kind);
      const harness::TrainSettings s = tf.settings();
      const SpaceSpec sp = harness::space_for(space_arg(space), lambda, pk, s);
      const learn::Checkpoint c = harness::train_policy(d, sp, pk, seed, s, log_line);
      learn::save_checkpoint(c, out);
      learn::write_loss_curve_csv(c, out + ".loss.csv");
      write_layout_sidecar(out + ".layout.json", c.space, c.num_entities,
                           c.diffusion ? c.diffusion->pred_horizon : 1);
      std::printf("saved %s (final loss %.5f)\n", out.c_str(), c.loss_curve.back());
    } else if (*eval) {
      const learn::Checkpoint c = learn::load_checkpoint(ckpt);
      const harness::EvalReport r = harness::evaluate(c, env, eval_spec_from(spec_path));
      harness::save_report(r, out);
      harness::write_bins_csv(r, out + ".bins.csv");
      for (const auto& b : r.bins) {
        std::printf("bin %d [%.2f, %.2f]: mean %.3f over %d episodes\n", b.bin, b.lo, b.hi,
                    b.mean, b.count);
      }
    } else if (*matrix) {
      const Dataset d = load_checked(dataset, sim);
      harness::MatrixConfig mc;
      mc.spaces.clear();
      for (const auto& s : spaces) mc.spaces.push_back(space_arg(s));
      mc.kinds.clear();
      for (const auto& k : kinds) mc.kinds.push_back(learn::policy_kind_from_string(k));
      mc.seeds = seeds;
      mc.lambda = lambda;
      mc.train = tf.settings();
      mc.eval = eval_spec_from(spec_path);
      mc.cache_dir = cache;
      const harness::MatrixResult r = harness::run_matrix(d, env, mc, log_line);
      harness::write_matrix(r, out);
      int failed = 0;
      for (const auto& c : r.cells) failed += c.failed ? 1 : 0;
      std::printf("matrix: %zu cells, %d failed; results in %s\n", r.cells.size(), failed,
                  out.c_str());
    } else if (*ablate) {
      const Dataset d = load_checked(dataset, sim);
      harness::AblationConfig ac;
      ac.lambdas = lambdas;
      ac.seeds = seeds;
      ac.selected_lambda = selected;
      ac.train = tf.settings();
      ac.eval = eval_spec_from(spec_path);
      ac.cache_dir = cache;
      const harness::AblationResult r = harness::ablate_lambda(d, env, ac, log_line);
      fs::create_directories(out);
      harness::write_ablation_csv(r, (fs::path(out) / "ablation.csv").string());
      std::ofstream(fs::path(out) / "ablation.svg") << harness::ablation_svg(r);
      for (const auto& s : r.summary) {
        std::printf("lambda %g: in-dist %.3f +- %.3f, farthest bin %.3f +- %.3f\n", s.lambda,
                    s.in_dist_mean, s.in_dist_std, s.farthest_mean, s.farthest_std);
      }
    } else if (*heat) {
      const harness::HeatmapFiles f =
          harness::export_heatmap(harness::load_report(report_path), out);
      std::printf("wrote %s%s\n", f.csv.c_str(),
                  f.svg.empty() ? " (fewer than 3 episodes, no image)" : (" and " + f.svg).c_str());
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
