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

// Deterministic planar push environment: a disc end-effector pushes a
// T-shaped block whose anchor point has to reach a fixed target.
//
// Coordinates are workspace pixels. Contact is resolved quasi-statically:
// there is no velocity state, the block is displaced out of the disc along
// the contact normal and turned about its centroid in proportion to the
// contact torque.

#ifndef BCOOD_PUSHT_SIM_H_
#define BCOOD_PUSHT_SIM_H_

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "bcood/geometry.h"
#include "bcood/rng.h"
#include "bcood/world.h"

namespace bcood {

struct Rect {
  Vector2d min = Vector2d::Zero();
  Vector2d max = Vector2d::Zero();

  bool contains(const Vector2d& p) const {
    return p.x() >= min.x() && p.y() >= min.y() && p.x() <= max.x() &&
           p.y() <= max.y();
  }
};

// Block outline in its body frame. The anchor is the body-frame origin.
struct TGeometry {
  std::vector<Vector2d> vertices;  // counter-clockwise, simple polygon
  Vector2d centroid = Vector2d::Zero();
  double area = 0.0;
  double gyration_sq = 0.0;  // polar second moment / area, about centroid
  double bounding_radius = 0.0;  // max vertex distance from the anchor

  // 120x30 bar on a 30x90 stem; anchor at the middle of the junction.
  static TGeometry classic();
  static TGeometry from_vertices(std::vector<Vector2d> vertices);
};

// World-frame outline of a block at `pose`.
std::vector<Vector2d> block_polygon(const TGeometry& geometry,
                                    const Pose2d& pose);

struct SimConfig {
  Rect workspace{{-384.0, -384.0}, {896.0, 896.0}};
  double ee_radius = 15.0;
  double max_step = 15.0;
  int horizon = 300;
  int substeps = 5;
  double rotation_gain = 1.0;
  double success_threshold = 0.95;
  double reward_scale = 534.0;
  Vector2d target{256.0, 256.0};
  Vector2d ee_start{256.0, 460.0};
  TGeometry t_geometry = TGeometry::classic();

  // Throws std::invalid_argument on a malformed configuration.
  void validate() const;
  // Stable content hash of every field that influences dynamics.
  std::uint64_t hash() const;
};

// Annulus of block positions around the target, sampled uniformly in area,
// with uniform polar angle and block heading.
struct SamplingManifold {
  double r_min = 32.0;
  double r_max = 180.0;

  static SamplingManifold in_distribution() { return {32.0, 180.0}; }
  static SamplingManifold out_of_distribution() { return {180.0, 534.0}; }

  void validate() const;
  // Closed-form radial CDF of the area-uniform law.
  double radial_cdf(double r) const;
};

// Raw annulus draw relative to the origin: (offset, heading).
Pose2d sample_manifold(const SamplingManifold& m, Rng& rng);

struct StepOutcome {
  WorldState next;
  double reward = 0.0;
  bool done = false;
  bool clipped = false;  // the action exceeded max_step
};

class PushTEnv {
 public:
  explicit PushTEnv(SimConfig config = {});

  const SimConfig& config() const { return config_; }

  // Block pose drawn from `manifold` relative to the target; rejection
  // sampled until the block lies inside the workspace and clear of the
  // end-effector disc. Throws std::runtime_error after 10^4 rejections.
  WorldState reset(std::uint64_t seed, const SamplingManifold& manifold) const;

  // Throws std::invalid_argument on a non-finite action.
  StepOutcome step(const WorldState& s, const WorldAction& a) const;

  double reward(const WorldState& s) const;
  bool done(const WorldState& s) const;

  Vector2d anchor(const WorldState& s) const { return s.entities.at(0).position; }
  std::vector<Vector2d> block_polygon(const Pose2d& pose) const;
  // Depth by which the end-effector disc overlaps the block (<= 0 if clear).
  double penetration(const WorldState& s) const;
  // True when the block lies fully inside the workspace.
  bool block_inside_workspace(const Pose2d& pose) const;

 private:
  void resolve_contact(Vector2d& ee, Pose2d& block) const;
  void enforce_walls(Vector2d& ee, Pose2d& block) const;

  SimConfig config_;
};

// Stateless two-phase pushing expert: approach a standoff point behind the
// anchor (orbiting the block when the straight path is blocked), then push
// the anchor towards the target.
class ScriptedDemonstrator {
 public:
  struct Params {
    double standoff_margin = 4.0;  // clearance beyond the block + disc
    double lateral_tolerance = 12.0;
    double lateral_gain = 0.5;
    double stop_tolerance = 2.0;
  };

  explicit ScriptedDemonstrator(const SimConfig& config)
      : ScriptedDemonstrator(config, Params{}) {}
  ScriptedDemonstrator(const SimConfig& config, Params params)
      : config_(config), params_(params) {}

  WorldAction operator()(const WorldState& s) const;

  // Standoff point behind the anchor as seen from the target.
  Vector2d standoff_point(const WorldState& s) const;

 private:
  SimConfig config_;
  Params params_;
};

using Policy = std::function<WorldAction(const WorldState&)>;

// Runs `policy` from `init` until done or `horizon` steps. A non-finite
// action aborts the episode; the final reward is the reward at abort.
Episode rollout(const PushTEnv& env, const Policy& policy,
                const WorldState& init, int horizon);

}  // namespace bcood

#endif  // BCOOD_PUSHT_SIM_H_
