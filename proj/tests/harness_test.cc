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

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "bcood/harness/collect.h"
#include "bcood/harness/dataset_io.h"
#include "bcood/harness/evaluate.h"
#include "bcood/harness/experiments.h"
#include "bcood/harness/heatmap.h"
#include "bcood/learn/trainer.h"

namespace bcood::harness {
namespace {

namespace fs = std::filesystem;

const PushTEnv& env() {
  static const PushTEnv e;
  return e;
}

const Dataset& demos() {
  static const Dataset d =
      collect_scripted(env(), 12, SamplingManifold::in_distribution(), 42);
  return d;
}

EvalSpec small_eval() {
  EvalSpec s;
  s.n_in_dist = 10;
  s.n_ood = 24;
  s.seeds = {0};
  return s;
}

TrainSettings tiny_settings() {
  TrainSettings t;
  t.mlp = learn::MlpSpec{1, 1, 2, 16, 0.05, 1e-5};
  t.mlp_train = learn::TrainConfig{1e-3, 256, 2, 0};
  t.diffusion.denoise_steps = 5;
  t.diffusion.denoiser = learn::MlpSpec{1, 1, 1, 16, 0.0, 1e-6};
  t.diffusion_train = learn::TrainConfig{1e-3, 256, 1, 0};
  return t;
}

fs::path scratch_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("bcood_harness_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

int count_lines(const std::string& s) {
  return static_cast<int>(std::count(s.begin(), s.end(), '\n'));
}

// ---- datasets ---------------------------------------------------------------

TEST(DatasetIo, RoundTripIsByteIdentical) {
  const std::string text = serialize_dataset(demos(), env().config());
  const DatasetFile f = parse_dataset(text);
  EXPECT_EQ(serialize_dataset(f.dataset, env().config()), text);
  EXPECT_EQ(dataset_hash(f.dataset), dataset_hash(demos()));
  ASSERT_EQ(f.dataset.episodes.size(), demos().episodes.size());
  for (std::size_t e = 0; e < demos().episodes.size(); ++e) {
    const Episode& a = demos().episodes[e];
    const Episode& b = f.dataset.episodes[e];
    EXPECT_EQ(a.seed, b.seed);
    EXPECT_EQ(a.final_reward, b.final_reward);
    ASSERT_EQ(a.steps.size(), b.steps.size());
    EXPECT_EQ(a.steps.back().state, b.steps.back().state);
  }
  EXPECT_EQ(f.t_geometry.vertices, env().config().t_geometry.vertices);
}

TEST(DatasetIo, SaveAndLoad) {
  const fs::path dir = scratch_dir("io");
  const std::string path = (dir / "demos.jsonl").string();
  save_dataset(demos(), env().config(), path);
  const DatasetFile f = load_dataset(path);
  EXPECT_EQ(dataset_hash(f.dataset), dataset_hash(demos()));
  EXPECT_THROW(load_dataset((dir / "missing.jsonl").string()), std::runtime_error);
}

TEST(DatasetIo, MalformedInputNamesTheLine) {
  std::string text = serialize_dataset(demos(), env().config());
  // Corrupt the third line.
  std::size_t pos = 0;
  for (int i = 0; i < 2; ++i) pos = text.find('\n', pos) + 1;
  text.insert(pos, "{not json");
  try {
    parse_dataset(text);
    FAIL() << "expected DatasetFormatError";
  } catch (const DatasetFormatError& e) {
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos) << e.what();
  }
  EXPECT_THROW(parse_dataset(""), DatasetFormatError);
  EXPECT_THROW(parse_dataset("{\"format\":\"other\"}\n"), DatasetFormatError);
}

// ---- collection -------------------------------------------------------------

TEST(Collect, DemoCountQualityAndDeterminism) {
  CollectStats stats;
  const Dataset d = collect_scripted(env(), 200, SamplingManifold::in_distribution(), 7, &stats);
  ASSERT_EQ(d.episodes.size(), 200u);
  for (const Episode& e : d.episodes) {
    EXPECT_GE(e.final_reward, kDemoQualityThreshold);
    EXPECT_EQ(e.source, DemoSource::kScripted);
  }
  EXPECT_EQ(stats.attempts, 200 + stats.discarded);
  const Dataset again = collect_scripted(env(), 200, SamplingManifold::in_distribution(), 7);
  EXPECT_EQ(dataset_hash(d), dataset_hash(again));
  const Dataset other = collect_scripted(env(), 200, SamplingManifold::in_distribution(), 8);
  EXPECT_NE(dataset_hash(d), dataset_hash(other));
}

TEST(Collect, SingleEpisode) {
  EXPECT_EQ(collect_scripted(env(), 1, SamplingManifold::in_distribution(), 3).episodes.size(),
            1u);
  EXPECT_THROW(collect_scripted(env(), 0, SamplingManifold::in_distribution(), 3),
               std::invalid_argument);
}

TEST(Collect, AbortsWhenMostDemosFail) {
  SimConfig c;
  c.horizon = 3;  // far too short for any demonstration to succeed
  const PushTEnv short_env(c);
  std::vector<std::string> log;
  EXPECT_THROW(collect_scripted(short_env, 5, SamplingManifold::in_distribution(), 1, nullptr,
                                [&](const std::string& m) { log.push_back(m); }),
               CollectionError);
  EXPECT_FALSE(log.empty());
}

// ---- evaluation geometry ----------------------------------------------------

TEST(Distance, Examples) {
  const EvalSpec s;
  const Vector2d t(256, 256);
  EXPECT_EQ(distance_to_manifold(t + Vector2d(100, 0), t, s), 0.0);
  EXPECT_EQ(distance_to_manifold(t + Vector2d(0, 180), t, s), 0.0);
  EXPECT_DOUBLE_EQ(distance_to_manifold(t + Vector2d(0, -534), t, s), 1.0);
  EXPECT_DOUBLE_EQ(distance_to_manifold(t + Vector2d(357, 0), t, s), 0.5);
  EXPECT_DOUBLE_EQ(distance_to_manifold(t + Vector2d(900, 0), t, s), 1.0);
}

TEST(Bins, PartitionUnitInterval) {
  EXPECT_EQ(distance_bin(0.0, 5), 0);
  EXPECT_EQ(distance_bin(1e-9, 5), 1);
  EXPECT_EQ(distance_bin(0.25, 5), 1);
  EXPECT_EQ(distance_bin(0.2500001, 5), 2);
  EXPECT_EQ(distance_bin(0.5, 5), 2);
  EXPECT_EQ(distance_bin(1.0, 5), 4);
  double prev_hi = 0.0;
  for (int b = 1; b < 5; ++b) {
    const auto [lo, hi] = bin_range(b, 5);
    EXPECT_DOUBLE_EQ(lo, prev_hi);
    EXPECT_DOUBLE_EQ(hi - lo, 0.25);
    prev_hi = hi;
  }
  EXPECT_DOUBLE_EQ(prev_hi, 1.0);
  const auto [lo0, hi0] = bin_range(0, 5);
  EXPECT_EQ(lo0, 0.0);
  EXPECT_EQ(hi0, 0.0);
}

TEST(EvalSpec, ValidatesAndRoundTrips) {
  EvalSpec s;
  EXPECT_NO_THROW(s.validate());
  const EvalSpec r = EvalSpec::from_json(s.to_json());
  EXPECT_EQ(r.to_json(), s.to_json());
  s.ood.r_min = 100.0;  // overlaps the in-distribution annulus
  EXPECT_THROW(s.validate(), std::invalid_argument);
  s = EvalSpec{};
  s.bins = 1;
  EXPECT_THROW(s.validate(), std::invalid_argument);
}

TEST(Starts, FixedAndBinned) {
  const EvalSpec spec;
  const auto a = evaluation_starts(env(), spec);
  const auto b = evaluation_starts(env(), spec);
  ASSERT_EQ(a.size(), 500u);
  EXPECT_EQ(starts_hash(a), starts_hash(b));
  for (std::size_t i = 0; i < a.size(); ++i) {
    ASSERT_EQ(a[i].state, b[i].state);
    const bool in = static_cast<int>(i) < spec.n_in_dist;
    EXPECT_EQ(a[i].in_dist, in);
    if (in) {
      EXPECT_EQ(a[i].bin, 0);
    } else {
      EXPECT_GE(a[i].bin, 1);
      EXPECT_EQ(a[i].bin, distance_bin(a[i].distance, spec.bins));
    }
  }
  EvalSpec other = spec;
  other.eval_seed += 1;
  EXPECT_NE(starts_hash(evaluation_starts(env(), other)), starts_hash(a));
}

// ---- evaluation -------------------------------------------------------------

TEST(Evaluate, DemonstratorSolvesInDistribution) {
  EvalSpec spec = small_eval();
  spec.n_in_dist = 100;
  FunctionController ctl(ScriptedDemonstrator(env().config()));
  const EvalReport r = evaluate_controller(env(), ctl, spec, 0, "demonstrator");
  EXPECT_GE(r.bin(0).mean, 0.9);
  EXPECT_EQ(r.bin(0).count, 100);
}

TEST(Evaluate, RandomWeightsMatchZeroActionBaseline) {
  const EvalSpec spec = small_eval();
  learn::TrainConfig frozen{1e-30, 1024, 1, 3};
  const TransformedDataset td = transform_dataset(demos(), SpaceSpec::world(1));
  const learn::Checkpoint c = learn::train_mlp(td, learn::MlpSpec{}, frozen);
  const EvalReport random = evaluate(c, env(), spec);
  FunctionController zero([](const WorldState&) { return WorldAction{}; });
  const EvalReport base = evaluate_controller(env(), zero, spec, 0, "zero");
  for (int b = 0; b < spec.bins; ++b) {
    EXPECT_NEAR(random.bin(b).mean, base.bin(b).mean, 0.1) << "bin " << b;
  }
}

TEST(Evaluate, IdenticalCheckpointGivesIdenticalReport) {
  const TrainSettings t = tiny_settings();
  const learn::Checkpoint c = train_policy(demos(), SpaceSpec::ee_frame(1),
                                           learn::PolicyKind::kMlp, 0, t);
  const EvalReport a = evaluate(c, env(), small_eval());
  const EvalReport b = evaluate(c, env(), small_eval());
  EXPECT_EQ(a.to_json(), b.to_json());
  EXPECT_EQ(a.hash(), b.hash());
  EXPECT_EQ(a.dataset_hash, dataset_hash(demos()));
  EXPECT_EQ(a.space, "t1");

  const EvalReport r = EvalReport::from_json(a.to_json());
  EXPECT_EQ(r.hash(), a.hash());
  const fs::path dir = scratch_dir("report");
  save_report(a, (dir / "r.json").string());
  EXPECT_EQ(load_report((dir / "r.json").string()).hash(), a.hash());
  write_bins_csv(a, (dir / "bins.csv").string());
  EXPECT_EQ(count_lines(slurp(dir / "bins.csv")), 1 + a.num_bins);

  EXPECT_THROW(evaluate(c, env(), small_eval(), SpaceSpec::world(1)), std::invalid_argument);
}

TEST(Evaluate, BinStatisticsAcrossSeeds) {
  EvalReport r;
  r.num_bins = 2;
  r.train_seeds = {0, 1};
  for (std::uint64_t s : {0u, 1u}) {
    for (int i = 0; i < 2; ++i) {
      EpisodeResult e;
      e.train_seed = s;
      e.index = i;
      e.bin = i;
      e.in_dist = i == 0;
      e.final_reward = s == 0 ? 0.2 + 0.2 * i : 0.6 + 0.2 * i;
      r.episodes.push_back(e);
    }
  }
  compute_bins(r);
  // Per-seed means 0.2 / 0.6 in bin 0: mean 0.4, sample std sqrt(0.08).
  EXPECT_NEAR(r.bin(0).mean, 0.4, 1e-12);
  EXPECT_NEAR(r.bin(0).std, std::sqrt(0.08), 1e-12);
  EXPECT_EQ(r.bin(0).count, 1);
  EXPECT_NEAR(r.bin(1).mean, 0.6, 1e-12);
}

TEST(Evaluate, DiffusionExecutesEightStepsPerInference) {
  TrainSettings t = tiny_settings();
  const learn::Checkpoint c = train_policy(demos(), SpaceSpec::ee_frame(2),
                                           learn::PolicyKind::kDiffusion, 0, t);
  ASSERT_EQ(c.diffusion->exec_horizon, 8);
  ASSERT_EQ(c.diffusion->pred_horizon, 16);
  ASSERT_EQ(c.diffusion->obs_horizon, 2);
  DiffusionController ctl(c, 1);
  const std::vector<WorldState> starts{
      env().reset(1, SamplingManifold::out_of_distribution()),
      env().reset(2, SamplingManifold::out_of_distribution())};
  const auto res = run_lockstep(env(), ctl, starts, 40);
  int steps = 0, inferences = 0;
  for (const RolloutResult& r : res) {
    steps += r.steps;
    inferences += (r.steps + 7) / 8;
  }
  EXPECT_EQ(ctl.executed(), steps);
  EXPECT_EQ(ctl.inferences(), inferences);
  EXPECT_EQ(res[0].steps, 40);
}

// ---- experiments ------------------------------------------------------------

TEST(Matrix, CountsCellsAndCarriesHashes) {
  MatrixConfig cfg;
  cfg.train = tiny_settings();
  cfg.eval = small_eval();
  cfg.seeds = {0, 1, 2};
  const MatrixResult r = run_matrix(demos(), env(), cfg);
  EXPECT_EQ(r.cells.size(), 9u);
  int reports = 0;
  for (const MatrixCell& c : r.cells) {
    EXPECT_FALSE(c.failed) << c.error;
    ASSERT_TRUE(c.checkpoint.has_value());
    ASSERT_TRUE(c.report.has_value());
    EXPECT_EQ(c.report->dataset_hash, r.dataset_hash);
    ++reports;
  }
  EXPECT_EQ(reports, 9);
  ASSERT_EQ(r.groups.size(), 3u);
  ASSERT_NE(r.group(SpaceKind::kLocalBall, learn::PolicyKind::kMlp), nullptr);
  EXPECT_EQ(r.group(SpaceKind::kLocalBall, learn::PolicyKind::kMlp)->report.train_seeds.size(),
            3u);
  EXPECT_NO_THROW(check_fairness(r.cells));

  const fs::path dir = scratch_dir("matrix");
  write_matrix(r, dir.string());
  EXPECT_TRUE(fs::exists(dir / "summary.csv"));
  EXPECT_TRUE(fs::exists(dir / "manifest.json"));
  int ckpts = 0;
  for (const auto& e : fs::directory_iterator(dir)) ckpts += e.path().extension() == ".ckpt";
  EXPECT_EQ(ckpts, 9);
}

TEST(Matrix, FairnessViolationIsRejected) {
  const TrainSettings t = tiny_settings();
  MatrixCell a, b;
  a.space = SpaceSpec::world(1);
  b.space = SpaceSpec::ee_frame(1);
  a.checkpoint = train_policy(demos(), a.space, learn::PolicyKind::kMlp, 0, t);
  TrainSettings wider = t;
  wider.mlp.hidden_dim = 24;
  b.checkpoint = train_policy(demos(), b.space, learn::PolicyKind::kMlp, 0, wider);
  EXPECT_THROW(check_fairness({a, b}), std::runtime_error);
  b.failed = true;
  EXPECT_NO_THROW(check_fairness({a, b}));
}

TEST(Matrix, HugeLambdaReproducesEeFrame) {
  const TrainSettings t = tiny_settings();
  const auto t1 = train_policy(demos(), SpaceSpec::ee_frame(1), learn::PolicyKind::kMlp, 5, t);
  const auto t2 =
      train_policy(demos(), SpaceSpec::local_ball(1e6), learn::PolicyKind::kMlp, 5, t);
  EXPECT_EQ(t1.weights, t2.weights);
  const EvalReport a = evaluate(t1, env(), small_eval());
  const EvalReport b = evaluate(t2, env(), small_eval());
  ASSERT_EQ(a.episodes.size(), b.episodes.size());
  for (std::size_t i = 0; i < a.episodes.size(); ++i) {
    EXPECT_EQ(a.episodes[i].final_reward, b.episodes[i].final_reward);
  }
}

TEST(Matrix, CachedTrainingReusesCheckpoint) {
  const TrainSettings t = tiny_settings();
  const fs::path dir = scratch_dir("cache");
  const std::string p = (dir / "c.ckpt").string();
  std::vector<std::string> log;
  auto logger = [&](const std::string& m) { log.push_back(m); };
  const auto a = train_policy_cached(p, demos(), SpaceSpec::world(1), learn::PolicyKind::kMlp,
                                     0, t, logger);
  const auto b = train_policy_cached(p, demos(), SpaceSpec::world(1), learn::PolicyKind::kMlp,
                                     0, t, logger);
  EXPECT_EQ(learn::serialize_checkpoint(a), learn::serialize_checkpoint(b));
  TrainSettings longer = t;
  longer.mlp_train.epochs = 3;
  const auto c = train_policy_cached(p, demos(), SpaceSpec::world(1), learn::PolicyKind::kMlp,
                                     0, longer, logger);
  EXPECT_EQ(c.loss_curve.size(), 3u);
}

TEST(Ablation, RowsPerLambdaAndSeed) {
  AblationConfig cfg;
  cfg.train = tiny_settings();
  cfg.eval = small_eval();
  const AblationResult r = ablate_lambda(demos(), env(), cfg);
  ASSERT_EQ(r.rows.size(), 9u);
  EXPECT_EQ(r.rows[0].lambda, 30.0);
  EXPECT_EQ(r.rows[8].lambda, 600.0);
  ASSERT_EQ(r.summary.size(), 3u);
  for (const AblationSummary& s : r.summary) {
    double sum = 0.0;
    for (const AblationRow& row : r.rows) {
      if (row.lambda == s.lambda) sum += row.in_dist_mean;
    }
    EXPECT_NEAR(s.in_dist_mean, sum / 3.0, 1e-12);
  }
  const fs::path dir = scratch_dir("ablation");
  write_ablation_csv(r, (dir / "ablation.csv").string());
  EXPECT_EQ(count_lines(slurp(dir / "ablation.csv")), 10);
  const std::string svg = ablation_svg(r);
  EXPECT_NE(svg.find("<svg"), std::string::npos);
  EXPECT_NE(svg.find("stroke-dasharray"), std::string::npos);
}

// ---- heat maps --------------------------------------------------------------

EvalReport report_with(const std::vector<std::pair<Vector2d, double>>& pts) {
  EvalReport r;
  int i = 0;
  for (const auto& [p, v] : pts) {
    EpisodeResult e;
    e.index = i++;
    e.initial_position = p;
    e.final_reward = v;
    r.episodes.push_back(e);
  }
  return r;
}

TEST(Heatmap, UniformRewardGivesConstantGrid) {
  std::vector<std::pair<Vector2d, double>> pts;
  Rng rng(3);
  for (int i = 0; i < 40; ++i) pts.push_back({Vector2d(rng.uniform(0, 512), rng.uniform(0, 512)), 1.0});
  HeatmapOptions opt;
  opt.grid = 16;
  const Eigen::MatrixXd g = idw_grid(heatmap_points(report_with(pts)), opt);
  EXPECT_LE((g.array() - 1.0).abs().maxCoeff(), 1e-12);
}

TEST(Heatmap, GridBoundedByRewards) {
  std::vector<std::pair<Vector2d, double>> pts;
  Rng rng(4);
  for (int i = 0; i < 60; ++i) {
    pts.push_back({Vector2d(rng.uniform(-200, 700), rng.uniform(-200, 700)), rng.uniform(0.2, 0.7)});
  }
  const auto hp = heatmap_points(report_with(pts));
  HeatmapOptions opt;
  opt.grid = 32;
  const Eigen::MatrixXd g = idw_grid(hp, opt);
  EXPECT_GE(g.minCoeff(), 0.2);
  EXPECT_LE(g.maxCoeff(), 0.7);
  EXPECT_EQ(idw(hp, hp[5].position, 12, 2.0), hp[5].reward);
}

TEST(Heatmap, AveragesSeedsPerStart) {
  EvalReport r = report_with({{Vector2d(1, 2), 0.2}, {Vector2d(1, 2), 0.6}});
  r.episodes[1].index = 0;
  const auto hp = heatmap_points(r);
  ASSERT_EQ(hp.size(), 1u);
  EXPECT_DOUBLE_EQ(hp[0].reward, 0.4);
}

TEST(Heatmap, SingleEpisodeWritesCsvOnly) {
  const fs::path dir = scratch_dir("heatmap");
  const HeatmapFiles one = export_heatmap(report_with({{Vector2d(10, 20), 0.5}}),
                                          (dir / "one").string());
  EXPECT_TRUE(one.svg.empty());
  EXPECT_FALSE(fs::exists(dir / "one.svg"));
  EXPECT_EQ(count_lines(slurp(one.csv)), 2);  // header + 1 row

  const HeatmapFiles many = export_heatmap(
      report_with({{Vector2d(10, 20), 0.5}, {Vector2d(300, 20), 0.1}, {Vector2d(40, 400), 0.9}}),
      (dir / "many").string());
  ASSERT_FALSE(many.svg.empty());
  const std::string svg = slurp(many.svg);
  EXPECT_NE(svg.find("stroke=\"red\""), std::string::npos);
}

}  // namespace
}  // namespace bcood::harness
