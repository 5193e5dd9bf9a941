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

#ifndef BCOOD_HARNESS_EXPERIMENTS_H_
#define BCOOD_HARNESS_EXPERIMENTS_H_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "bcood/harness/collect.h"
#include "bcood/harness/evaluate.h"
#include "bcood/learn/checkpoint.h"
#include "bcood/learn/config.h"
#include "bcood/pusht_sim.h"
#include "bcood/spaces.h"

namespace bcood::harness {

inline constexpr double kDefaultLambda = 150.0;

struct TrainSettings {
  learn::MlpSpec mlp;
  learn::TrainConfig mlp_train = learn::TrainConfig::mlp_defaults();
  learn::DiffusionSpec diffusion;
  learn::TrainConfig diffusion_train = learn::TrainConfig::diffusion_defaults();
};

// Space used for a policy kind: single-step windows for the MLP, T_X-step
// windows for diffusion.
SpaceSpec space_for(SpaceKind kind, std::optional<double> lambda, learn::PolicyKind policy,
                    const TrainSettings& settings);

// Transforms the dataset and trains one policy. The dataset hash is stored
// in the checkpoint.
learn::Checkpoint train_policy(const Dataset& d, const SpaceSpec& space,
                               learn::PolicyKind kind, std::uint64_t seed,
                               const TrainSettings& settings, const LogFn& log = {});

// train_policy() with an on-disk cache: an existing checkpoint at `path` is
// reused when its space, kind, seed, hyperparameters and dataset hash all
// match; otherwise the policy is trained and written to `path`.
learn::Checkpoint train_policy_cached(const std::string& path, const Dataset& d,
                                      const SpaceSpec& space, learn::PolicyKind kind,
                                      std::uint64_t seed, const TrainSettings& settings,
                                      const LogFn& log = {});

struct MatrixConfig {
  std::vector<SpaceKind> spaces{SpaceKind::kWorld, SpaceKind::kEeFrame, SpaceKind::kLocalBall};
  double lambda = kDefaultLambda;
  std::vector<learn::PolicyKind> kinds{learn::PolicyKind::kMlp};
  std::vector<std::uint64_t> seeds{0, 1, 2};
  TrainSettings train;
  EvalSpec eval;
  std::string out_dir;    // empty: nothing written
  std::string cache_dir;  // empty: always train
};

struct MatrixCell {
  SpaceSpec space;
  learn::PolicyKind kind = learn::PolicyKind::kMlp;
  std::uint64_t seed = 0;
  bool failed = false;
  std::string error;
  std::optional<learn::Checkpoint> checkpoint;
  std::optional<EvalReport> report;
};

struct MatrixGroup {
  SpaceSpec space;
  learn::PolicyKind kind = learn::PolicyKind::kMlp;
  EvalReport report;  // merged over the successful seeds
};

struct MatrixResult {
  std::string dataset_hash;
  std::vector<MatrixCell> cells;
  std::vector<MatrixGroup> groups;

  const MatrixGroup* group(SpaceKind space, learn::PolicyKind kind) const;
};

// Throws std::runtime_error when two successful cells of the same policy
// kind disagree on their serialised hyperparameters.
void check_fairness(const std::vector<MatrixCell>& cells);

// Every (space, kind, seed) cell is trained and evaluated; a cell whose
// training fails is marked failed and the others continue.
MatrixResult run_matrix(const Dataset& d, const PushTEnv& env, const MatrixConfig& cfg,
                        const LogFn& log = {});

// Output layout under `dir`:
//   <space>-<kind>-seed<k>.ckpt / .loss.csv / .report.json
//   <space>-<kind>.report.json    merged over seeds
//   summary.csv                   one row per (space, kind, bin)
//   manifest.json                 dataset hash and per-cell status and hashes
void write_matrix(const MatrixResult& r, const std::string& dir);

struct AblationConfig {
  std::vector<double> lambdas{30.0, 150.0, 600.0};
  std::vector<std::uint64_t> seeds{0, 1, 2};
  double selected_lambda = kDefaultLambda;
  TrainSettings train;
  EvalSpec eval;
  std::string cache_dir;
};

struct AblationRow {
  double lambda = 0.0;
  std::uint64_t seed = 0;
  bool failed = false;
  double in_dist_mean = 0.0;
  double farthest_mean = 0.0;
};

struct AblationSummary {
  double lambda = 0.0;
  double in_dist_mean = 0.0;
  double in_dist_std = 0.0;
  double farthest_mean = 0.0;
  double farthest_std = 0.0;
};

struct AblationResult {
  std::string dataset_hash;
  double selected_lambda = kDefaultLambda;
  std::vector<AblationRow> rows;  // lambda-major, one per (lambda, seed)
  std::vector<AblationSummary> summary;
};

AblationResult ablate_lambda(const Dataset& d, const PushTEnv& env, const AblationConfig& cfg,
                             const LogFn& log = {});

void write_ablation_csv(const AblationResult& r, const std::string& path);
// Line plot of both means against lambda; the selected lambda is dotted.
std::string ablation_svg(const AblationResult& r);

}  // namespace bcood::harness

#endif  // BCOOD_HARNESS_EXPERIMENTS_H_
