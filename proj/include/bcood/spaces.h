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

// Problem-space encoders. A state window is turned into a flat feature
// vector in one of three spaces:
//
//   kWorld       raw world-frame features
//   kEeFrame     every pose re-expressed in the end-effector frame of the
//                newest step, the fixed target added as an extra entity
//   kLocalBall   kEeFrame with every entity/target position pulled into the
//                lambda-ball around the end-effector
//
// Per-step layout (oldest step first), see state_layout():
//
//   kWorld:               ee.x ee.y | e_i.x e_i.y e_i.cos e_i.sin ... | target.x target.y
//   kEeFrame/kLocalBall:  [ee.x ee.y] | e_i.x e_i.y e_i.cos e_i.sin ... | target.x target.y
//
// The bracketed end-effector entry is omitted when drop_trivial_ee is set
// (single-step windows only, where it is identically zero). Headings are
// encoded as (cos, sin). Actions are end-effector offsets and only see the
// rotational part of the frame.

#ifndef BCOOD_SPACES_H_
#define BCOOD_SPACES_H_

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "bcood/geometry.h"
#include "bcood/world.h"

namespace bcood {

enum class SpaceKind { kWorld, kEeFrame, kLocalBall };

std::string_view to_string(SpaceKind k);  // "p", "t1", "t2"
SpaceKind space_kind_from_string(std::string_view s);

struct SpaceSpec {
  SpaceKind kind = SpaceKind::kWorld;
  std::optional<ProjectionRadius> lambda;  // required for kLocalBall
  int obs_horizon = 1;
  bool drop_trivial_ee = false;

  // Throws std::invalid_argument when the combination is inconsistent.
  void validate() const;

  static SpaceSpec world(int obs_horizon = 1);
  static SpaceSpec ee_frame(int obs_horizon = 1);
  static SpaceSpec local_ball(double lambda, int obs_horizon = 1);
};

bool operator==(const SpaceSpec& a, const SpaceSpec& b);

// Number of state features for a space with `num_entities` objects.
int state_dim(const SpaceSpec& spec, int num_entities);
// Semantic name of every state feature, e.g. "t1.entity0.cos".
std::vector<std::string> state_layout(const SpaceSpec& spec, int num_entities);

struct EncodedState {
  Eigen::VectorXd features;
  Pose2d frame_e;  // identity for kWorld
};

// `window` is ordered oldest to newest and must hold spec.obs_horizon states.
EncodedState encode_state(std::span<const WorldState> window,
                          const SpaceSpec& spec);

// Frame used for actions paired with a window ending at `newest`.
Pose2d action_frame(const WorldState& newest, const SpaceSpec& spec);

Vector2d encode_action(const WorldAction& a, const Pose2d& frame_e);
WorldAction decode_action(const Vector2d& v, const Pose2d& frame_e);

// Supervised samples for one problem space, column-major (one column per
// sample). With action_horizon > 1 each column holds the flattened action
// sequence a_t .. a_{t+H-1}, right-padded with the episode's last action;
// `mask` marks real (1) versus padded (0) steps.
struct TransformedDataset {
  SpaceSpec space;
  int action_horizon = 1;
  int num_entities = 0;
  Eigen::MatrixXd states;   // state_dim x N
  Eigen::MatrixXd actions;  // 2*action_horizon x N
  Eigen::MatrixXd mask;     // action_horizon x N
  std::vector<Pose2d> frames;
  std::vector<int> episode_index;
  std::vector<int> step_index;
  std::vector<std::string> layout;

  int size() const { return static_cast<int>(states.cols()); }
};

// Observation windows are left-padded by repeating the first state. Throws
// std::invalid_argument on an empty episode.
TransformedDataset transform_dataset(const Dataset& d, const SpaceSpec& spec,
                                     int action_horizon = 1);

// Sidecar JSON describing the state-vector layout of a transformed dataset.
std::string layout_sidecar_json(const SpaceSpec& spec, int num_entities,
                                int action_horizon);
void write_layout_sidecar(const std::string& path, const SpaceSpec& spec,
                          int num_entities, int action_horizon);

}  // namespace bcood

#endif  // BCOOD_SPACES_H_
