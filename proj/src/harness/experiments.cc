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

#include "bcood/harness/experiments.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "bcood/harness/dataset_io.h"
#include "bcood/hash.h"
#include "bcood/learn/diffusion.h"
#include "bcood/learn/trainer.h"

namespace bcood::harness {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

SpaceSpec space_for(SpaceKind kind, std::optional<double> lambda, learn::PolicyKind policy,
                    const TrainSettings& settings) {
  const int th = policy == learn::PolicyKind::kMlp ? 1 : settings.diffusion.obs_horizon;
  switch (kind) {
    case SpaceKind::kWorld: return SpaceSpec::world(th);
    case SpaceKind::kEeFrame: return SpaceSpec::ee_frame(th);
    case SpaceKind::kLocalBall:
      return SpaceSpec::local_ball(lambda.value_or(kDefaultLambda), th);
  }
  return SpaceSpec::world(th);
}

namespace {

std::string cell_name(const SpaceSpec& s, learn::PolicyKind k) {
  std::string n = std::string(to_string(s.kind)) + "-" + std::string(learn::to_string(k));
  if (s.lambda) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "-l%g", s.lambda->value());
    n += buf;
  }
  return n;
}

learn::ProgressFn progress_logger(const LogFn& log, const std::string& what, int epochs) {
  if (!log) return {};
  const int every = std::max(1, epochs / 10);
  return [log, what, every, epochs](int epoch, double loss) {
    if (epoch % every != 0 && epoch != epochs) return;
    char buf[160];
    std::snprintf(buf, sizeof(buf), "%s: epoch %d/%d loss %.5f", what.c_str(), epoch,
                  epochs, loss);
    log(buf);
  };
}

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

double std_of(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

}  // namespace

learn::Checkpoint train_policy(const Dataset& d, const SpaceSpec& space,
                               learn::PolicyKind kind, std::uint64_t seed,
                               const TrainSettings& settings, const LogFn& log) {
  const std::string what = cell_name(space, kind) + " seed " + std::to_string(seed);
  learn::Checkpoint c;
  if (kind == learn::PolicyKind::kMlp) {
    const TransformedDataset td = transform_dataset(d, space, 1);
    learn::TrainConfig cfg = settings.mlp_train;
    cfg.seed = seed;
    c = learn::train_mlp(td, settings.mlp, cfg, progress_logger(log, what, cfg.epochs));
  } else {
    const TransformedDataset td =
        transform_dataset(d, space, settings.diffusion.pred_horizon);
    learn::TrainConfig cfg = settings.diffusion_train;
    cfg.seed = seed;
    c = learn::ddpm_train(td, settings.diffusion, cfg,
                          progress_logger(log, what, cfg.epochs));
  }
  c.dataset_hash = dataset_hash(d);
  return c;
}

learn::Checkpoint train_policy_cached(const std::string& path, const Dataset& d,
                                      const SpaceSpec& space, learn::PolicyKind kind,
                                      std::uint64_t seed, const TrainSettings& settings,
                                      const LogFn& log) {
  if (fs::exists(path)) {
    try {
      learn::Checkpoint c = learn::load_checkpoint(path);
      learn::Checkpoint probe;
      probe.kind = kind;
      if (kind == learn::PolicyKind::kMlp) {
        probe.net = settings.mlp;
        probe.train = settings.mlp_train;
      } else {
        probe.net = settings.diffusion.denoiser;
        probe.diffusion = settings.diffusion;
        probe.train = settings.diffusion_train;
      }
      if (c.kind == kind && c.space == space && c.train.seed == seed &&
          c.hyperparameters() == probe.hyperparameters() &&
          c.dataset_hash == dataset_hash(d)) {
        if (log) log("reusing " + path);
        return c;
      }
    } catch (const std::exception& e) {
      if (log) log("ignoring unreadable cache " + path + ": " + e.what());
    }
  }
  learn::Checkpoint c = train_policy(d, space, kind, seed, settings, log);
  if (!path.empty()) {
    const fs::path parent = fs::path(path).parent_path();
    if (!parent.empty()) fs::create_directories(parent);
    learn::save_checkpoint(c, path);
  }
  return c;
}

const MatrixGroup* MatrixResult::group(SpaceKind space, learn::PolicyKind kind) const {
  for (const MatrixGroup& g : groups) {
    if (g.space.kind == space && g.kind == kind) return &g;
  }
  return nullptr;
}

void check_fairness(const std::vector<MatrixCell>& cells) {
  for (const learn::PolicyKind kind : {learn::PolicyKind::kMlp, learn::PolicyKind::kDiffusion}) {
    std::optional<std::string> ref;
    std::string ref_name;
    for (const MatrixCell& c : cells) {
      if (c.failed || c.kind != kind || !c.checkpoint) continue;
      const std::string h = c.checkpoint->hyperparameters().dump();
      if (!ref) {
        ref = h;
        ref_name = cell_name(c.space, kind);
      } else if (*ref != h) {
        throw std::runtime_error("hyperparameters differ between " + ref_name + " and " +
                                 cell_name(c.space, kind) + ": " + *ref + " vs " + h);
      }
    }
  }
}

MatrixResult run_matrix(const Dataset& d, const PushTEnv& env, const MatrixConfig& cfg,
                        const LogFn& log) {
  cfg.eval.validate();
  MatrixResult out;
  out.dataset_hash = dataset_hash(d);
  for (const learn::PolicyKind kind : cfg.kinds) {
    for (const SpaceKind sk : cfg.spaces) {
      const SpaceSpec space = space_for(sk, cfg.lambda, kind, cfg.train);
      std::vector<EvalReport> reports;
      for (const std::uint64_t seed : cfg.seeds) {
        MatrixCell cell;
        cell.space = space;
        cell.kind = kind;
        cell.seed = seed;
        const std::string name = cell_name(space, kind) + "-seed" + std::to_string(seed);
        try {
          cell.checkpoint =
              cfg.cache_dir.empty()
                  ? train_policy(d, space, kind, seed, cfg.train, log)
                  : train_policy_cached((fs::path(cfg.cache_dir) / (name + ".ckpt")).string(),
                                        d, space, kind, seed, cfg.train, log);
          cell.report = evaluate(*cell.checkpoint, env, cfg.eval, space);
          reports.push_back(*cell.report);
          if (log) {
            char buf[160];
            std::snprintf(buf, sizeof(buf), "%s: in-dist %.3f, farthest bin %.3f",
                          name.c_str(), cell.report->bin(0).mean,
                          cell.report->farthest_bin().mean);
            log(buf);
          }
        } catch (const std::exception& e) {
          cell.failed = true;
          cell.error = e.what();
          cell.report.reset();
          if (log) log(name + " failed: " + e.what());
        }
        out.cells.push_back(std::move(cell));
      }
      if (!reports.empty()) out.groups.push_back({space, kind, merge_reports(reports)});
    }
  }
  check_fairness(out.cells);
  return out;
}

void write_matrix(const MatrixResult& r, const std::string& dir) {
  fs::create_directories(dir);
  json manifest;
  manifest["format"] = "bcood-matrix";
  manifest["dataset_hash"] = r.dataset_hash;
  json cells = json::array();
  for (const MatrixCell& c : r.cells) {
    const std::string name = cell_name(c.space, c.kind) + "-seed" + std::to_string(c.seed);
    json j = {{"name", name},
              {"space", std::string(to_string(c.space.kind))},
              {"kind", std::string(learn::to_string(c.kind))},
              {"seed", c.seed},
              {"failed", c.failed}};
    if (c.failed) j["error"] = c.error;
    if (c.checkpoint) {
      const fs::path p = fs::path(dir) / (name + ".ckpt");
      learn::save_checkpoint(*c.checkpoint, p.string());
      learn::write_loss_curve_csv(*c.checkpoint, (fs::path(dir) / (name + ".loss.csv")).string());
      j["checkpoint_hash"] = hex64(Fnv1a().str(learn::serialize_checkpoint(*c.checkpoint)).value());
    }
    if (c.report) {
      save_report(*c.report, (fs::path(dir) / (name + ".report.json")).string());
      j["report_hash"] = c.report->hash();
    }
    cells.push_back(std::move(j));
  }
  manifest["cells"] = std::move(cells);

  std::ofstream summary(fs::path(dir) / "summary.csv");
  summary.precision(10);
  summary << "space,kind,lambda,bin,distance_lo,distance_hi,mean_final_reward,"
             "std_across_seeds,episodes_per_seed,seeds\n";
  json groups = json::array();
  for (const MatrixGroup& g : r.groups) {
    const std::string name = cell_name(g.space, g.kind);
    save_report(g.report, (fs::path(dir) / (name + ".report.json")).string());
    groups.push_back({{"name", name}, {"report_hash", g.report.hash()}});
    for (const BinStats& b : g.report.bins) {
      summary << to_string(g.space.kind) << ',' << learn::to_string(g.kind) << ',';
      if (g.space.lambda) summary << g.space.lambda->value();
      summary << ',' << b.bin << ',' << b.lo << ',' << b.hi << ',' << b.mean << ','
              << b.std << ',' << b.count << ',' << g.report.train_seeds.size() << '\n';
    }
  }
  manifest["groups"] = std::move(groups);
  std::ofstream(fs::path(dir) / "manifest.json") << manifest.dump(2) << '\n';
}

AblationResult ablate_lambda(const Dataset& d, const PushTEnv& env, const AblationConfig& cfg,
                             const LogFn& log) {
  if (cfg.lambdas.empty()) throw std::invalid_argument("ablate_lambda: no lambda values");
  cfg.eval.validate();
  AblationResult out;
  out.dataset_hash = dataset_hash(d);
  out.selected_lambda = cfg.selected_lambda;
  for (const double lambda : cfg.lambdas) {
    const SpaceSpec space =
        space_for(SpaceKind::kLocalBall, lambda, learn::PolicyKind::kMlp, cfg.train);
    std::vector<double> in, far;
    for (const std::uint64_t seed : cfg.seeds) {
      AblationRow row;
      row.lambda = lambda;
      row.seed = seed;
      const std::string name =
          cell_name(space, learn::PolicyKind::kMlp) + "-seed" + std::to_string(seed);
      try {
        const learn::Checkpoint c =
            cfg.cache_dir.empty()
                ? train_policy(d, space, learn::PolicyKind::kMlp, seed, cfg.train, log)
                : train_policy_cached((fs::path(cfg.cache_dir) / (name + ".ckpt")).string(), d,
                                      space, learn::PolicyKind::kMlp, seed, cfg.train, log);
        const EvalReport rep = evaluate(c, env, cfg.eval, space);
        row.in_dist_mean = rep.bin(0).mean;
        row.farthest_mean = rep.farthest_bin().mean;
        in.push_back(row.in_dist_mean);
        far.push_back(row.farthest_mean);
        if (log) {
          char buf[160];
          std::snprintf(buf, sizeof(buf), "%s: in-dist %.3f, farthest bin %.3f",
                        name.c_str(), row.in_dist_mean, row.farthest_mean);
          log(buf);
        }
      } catch (const learn::TrainingError& e) {
        row.failed = true;
        if (log) log(name + " failed: " + e.what());
      }
      out.rows.push_back(row);
    }
    out.summary.push_back({lambda, mean_of(in), std_of(in), mean_of(far), std_of(far)});
  }
  return out;
}

void write_ablation_csv(const AblationResult& r, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write " + path);
  f.precision(10);
  f << "lambda,seed,failed,in_dist_mean,farthest_bin_mean\n";
  for (const AblationRow& row : r.rows) {
    f << row.lambda << ',' << row.seed << ',' << (row.failed ? 1 : 0) << ','
      << row.in_dist_mean << ',' << row.farthest_mean << '\n';
  }
}

std::string ablation_svg(const AblationResult& r) {
  const double w = 560, h = 360, ml = 60, mr = 20, mt = 20, mb = 50;
  double lo = r.selected_lambda, hi = r.selected_lambda;
  for (const auto& s : r.summary) {
    lo = std::min(lo, s.lambda);
    hi = std::max(hi, s.lambda);
  }
  const double llo = std::log10(lo) - 0.1, lhi = std::log10(hi) + 0.1;
  auto px = [&](double lambda) {
    return ml + (std::log10(lambda) - llo) / (lhi - llo) * (w - ml - mr);
  };
  auto py = [&](double v) { return mt + (1.0 - std::clamp(v, 0.0, 1.0)) * (h - mt - mb); };

  std::ostringstream o;
  o.precision(6);
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h
    << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  o << "<line x1=\"" << ml << "\" y1=\"" << py(0) << "\" x2=\"" << w - mr << "\" y2=\""
    << py(0) << "\" stroke=\"black\"/>\n";
  o << "<line x1=\"" << ml << "\" y1=\"" << py(0) << "\" x2=\"" << ml << "\" y2=\"" << py(1)
    << "\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double v = i / 4.0;
    o << "<text x=\"" << ml - 8 << "\" y=\"" << py(v) + 4 << "\" text-anchor=\"end\">" << v
      << "</text>\n";
  }
  for (const auto& s : r.summary) {
    o << "<text x=\"" << px(s.lambda) << "\" y=\"" << h - mb + 18
      << "\" text-anchor=\"middle\">" << s.lambda << "</text>\n";
  }
  o << "<text x=\"" << (ml + w - mr) / 2 << "\" y=\"" << h - 10
    << "\" text-anchor=\"middle\">lambda (px)</text>\n";
  o << "<text transform=\"translate(16," << (mt + h - mb) / 2
    << ") rotate(-90)\" text-anchor=\"middle\">mean final reward</text>\n";
  o << "<line x1=\"" << px(r.selected_lambda) << "\" y1=\"" << py(0) << "\" x2=\""
    << px(r.selected_lambda) << "\" y2=\"" << py(1)
    << "\" stroke=\"gray\" stroke-dasharray=\"2,4\"/>\n";

  struct Series {
    const char* name;
    const char* color;
    bool far;
  };
  int legend = 0;
  for (const Series& s : {Series{"in-distribution", "#1f77b4", false},
                          Series{"farthest OOD bin", "#d62728", true}}) {
    o << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"2\" points=\"";
    for (const auto& a : r.summary) {
      o << px(a.lambda) << ',' << py(s.far ? a.farthest_mean : a.in_dist_mean) << ' ';
    }
    o << "\"/>\n";
    for (const auto& a : r.summary) {
      const double m = s.far ? a.farthest_mean : a.in_dist_mean;
      const double sd = s.far ? a.farthest_std : a.in_dist_std;
      o << "<line x1=\"" << px(a.lambda) << "\" y1=\"" << py(m - sd) << "\" x2=\""
        << px(a.lambda) << "\" y2=\"" << py(m + sd) << "\" stroke=\"" << s.color << "\"/>\n";
      o << "<circle cx=\"" << px(a.lambda) << "\" cy=\"" << py(m) << "\" r=\"3\" fill=\""
        << s.color << "\"/>\n";
    }
    o << "<text x=\"" << w - mr - 130 << "\" y=\"" << mt + 14 + 16 * legend << "\" fill=\""
      << s.color << "\">" << s.name << "</text>\n";
    ++legend;
  }
  o << "</svg>\n";
  return o.str();
}

}  // namespace bcood::harness
