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

// Distance-binned evaluation. Every condition is rolled out from the same
// list of initial states, drawn once from (EvalSpec, eval_seed). Episodes
// are binned by normalised distance to the in-distribution manifold:
//
//   bin 0            d == 0        (inside the in-distribution torus)
//   bin k, k >= 1    d in ((k-1)/(B-1), k/(B-1)]
//
// so the B-1 out-of-distribution bins have equal width.

#ifndef BCOOD_HARNESS_EVALUATE_H_
#define BCOOD_HARNESS_EVALUATE_H_

#include <cstdint>
#include <deque>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "bcood/learn/checkpoint.h"
#include "bcood/learn/diffusion.h"
#include "bcood/learn/trainer.h"
#include "bcood/pusht_sim.h"
#include "bcood/rng.h"
#include "bcood/spaces.h"
#include "json.hpp"

namespace bcood::harness {

struct EvalSpec {
  SamplingManifold in_dist = SamplingManifold::in_distribution();
  SamplingManifold ood = SamplingManifold::out_of_distribution();
  int n_in_dist = 100;
  int n_ood = 400;
  int bins = 5;
  std::vector<std::uint64_t> seeds{0, 1, 2};  // training seeds
  std::uint64_t eval_seed = 0x6576616c;

  void validate() const;

  nlohmann::ordered_json to_json() const;
  static EvalSpec from_json(const nlohmann::ordered_json& j);
};

// Normalised radial distance of an object position beyond the outer edge
// of the in-distribution torus, clamped to [0, 1].
double distance_to_manifold(const Vector2d& position, const Vector2d& target,
                            const EvalSpec& spec);
int distance_bin(double distance, int bins);
// [lo, hi] of a bin in normalised distance.
std::pair<double, double> bin_range(int bin, int bins);

struct EvalStart {
  int index = 0;
  std::uint64_t seed = 0;
  bool in_dist = true;
  WorldState state;
  double distance = 0.0;
  int bin = 0;
};

// In-distribution starts first, then out-of-distribution ones.
std::vector<EvalStart> evaluation_starts(const PushTEnv& env, const EvalSpec& spec);
std::string starts_hash(const std::vector<EvalStart>& starts);

// Acts for a batch of live episodes in lockstep. `ids` index the episodes
// passed to begin(); states are the current states in the same order.
class BatchController {
 public:
  virtual ~BatchController() = default;
  virtual void begin(int num_episodes) = 0;
  virtual std::vector<WorldAction> act(const std::vector<int>& ids,
                                       const std::vector<const WorldState*>& states) = 0;
};

// Wraps a single-state policy such as the scripted demonstrator.
class FunctionController : public BatchController {
 public:
  explicit FunctionController(Policy policy) : policy_(std::move(policy)) {}
  void begin(int) override {}
  std::vector<WorldAction> act(const std::vector<int>& ids,
                               const std::vector<const WorldState*>& states) override;

 private:
  Policy policy_;
};

// Keeps the last obs_horizon states of every episode (left-padded with the
// first state).
class WindowedController : public BatchController {
 public:
  explicit WindowedController(SpaceSpec space) : space_(space) {}
  void begin(int num_episodes) override;

 protected:
  void observe(int id, const WorldState& s);
  EncodedState encode(int id) const;
  const SpaceSpec& space() const { return space_; }

 private:
  SpaceSpec space_;
  std::vector<std::vector<WorldState>> windows_;
};

// Encode the newest window, predict one action, decode it.
class MlpController : public WindowedController {
 public:
  explicit MlpController(const learn::Checkpoint& c);
  std::vector<WorldAction> act(const std::vector<int>& ids,
                               const std::vector<const WorldState*>& states) override;

 private:
  learn::MlpPolicyModel model_;
};

// Receding horizon: sample T_Ap actions, execute the first T_Ae, repeat.
class DiffusionController : public WindowedController {
 public:
  DiffusionController(const learn::Checkpoint& c, std::uint64_t seed);
  void begin(int num_episodes) override;
  std::vector<WorldAction> act(const std::vector<int>& ids,
                               const std::vector<const WorldState*>& states) override;

  std::int64_t inferences() const { return inferences_; }
  std::int64_t executed() const { return executed_; }

 private:
  learn::DiffusionPolicyModel model_;
  Rng rng_;
  std::vector<std::deque<WorldAction>> queues_;
  std::int64_t inferences_ = 0;
  std::int64_t executed_ = 0;
};

struct RolloutResult {
  WorldState initial;
  WorldState final_state;
  double final_reward = 0.0;
  int steps = 0;
  bool aborted = false;  // the controller produced a non-finite action
};

// Runs every start in lockstep until done or `horizon` steps.
std::vector<RolloutResult> run_lockstep(const PushTEnv& env, BatchController& ctl,
                                        const std::vector<WorldState>& starts,
                                        int horizon);

struct EpisodeResult {
  std::uint64_t train_seed = 0;
  int index = 0;
  std::uint64_t start_seed = 0;
  bool in_dist = true;
  Vector2d initial_position = Vector2d::Zero();
  double initial_theta = 0.0;
  double distance = 0.0;
  int bin = 0;
  double final_reward = 0.0;
  int steps = 0;
  bool aborted = false;
};

struct BinStats {
  int bin = 0;
  double lo = 0.0;
  double hi = 0.0;
  double mean = 0.0;  // mean over seeds of the per-seed bin mean
  double std = 0.0;   // sample std over seeds of the per-seed bin mean
  int count = 0;      // episodes per seed
};

struct EvalReport {
  std::string label;
  std::string space;  // "p", "t1", "t2" or "" for non-learned policies
  std::optional<double> lambda;
  std::string kind;
  std::string dataset_hash;
  std::string starts_hash;
  std::vector<std::uint64_t> train_seeds;
  int num_bins = 5;
  std::vector<BinStats> bins;
  std::vector<EpisodeResult> episodes;

  const BinStats& bin(int b) const { return bins.at(static_cast<std::size_t>(b)); }
  const BinStats& farthest_bin() const { return bins.back(); }

  nlohmann::ordered_json to_json() const;
  static EvalReport from_json(const nlohmann::ordered_json& j);
  std::string hash() const;
};

// Recomputes report.bins from report.episodes.
void compute_bins(EvalReport& report);

// Evaluates a controller from the fixed starts; tagged with `train_seed`.
EvalReport evaluate_controller(const PushTEnv& env, BatchController& ctl,
                               const EvalSpec& spec, std::uint64_t train_seed,
                               const std::string& label);

// Throws std::invalid_argument when the checkpoint does not fit `expected`
// or the environment.
EvalReport evaluate(const learn::Checkpoint& c, const PushTEnv& env, const EvalSpec& spec,
                    const std::optional<SpaceSpec>& expected = std::nullopt);

// Concatenates per-seed reports of one condition and recomputes bins.
EvalReport merge_reports(const std::vector<EvalReport>& reports);

void save_report(const EvalReport& r, const std::string& path);
EvalReport load_report(const std::string& path);
void write_bins_csv(const EvalReport& r, const std::string& path);

}  // namespace bcood::harness

#endif  // BCOOD_HARNESS_EVALUATE_H_
