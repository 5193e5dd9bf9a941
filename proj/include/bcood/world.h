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

#ifndef BCOOD_WORLD_H_
#define BCOOD_WORLD_H_

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "bcood/geometry.h"

namespace bcood {

// Ground-truth scene, every pose measured in the fixed world frame.
struct WorldState {
  Pose2d ee;                     // point-mass end-effector, heading unused
  std::vector<Pose2d> entities;  // one per manipulated object
  Vector2d target = Vector2d::Zero();
  int t = 0;

  bool operator==(const WorldState& o) const;
};

// End-effector position offset in the world frame.
struct WorldAction {
  Vector2d delta = Vector2d::Zero();

  bool operator==(const WorldAction& o) const { return delta == o.delta; }
};

enum class DemoSource { kScripted, kHuman, kPolicy };

std::string_view to_string(DemoSource s);
DemoSource demo_source_from_string(std::string_view s);

struct Step {
  WorldState state;
  WorldAction action;
  double reward = 0.0;  // reward of the state reached by `action`
};

struct Episode {
  std::int64_t episode_id = 0;
  std::uint64_t seed = 0;
  DemoSource source = DemoSource::kScripted;
  std::vector<Step> steps;
  double final_reward = 0.0;
  bool aborted = false;
  // State after the last action; not persisted.
  WorldState final_state;
};

struct Dataset {
  std::vector<Episode> episodes;

  std::size_t num_steps() const {
    std::size_t n = 0;
    for (const auto& e : episodes) n += e.steps.size();
    return n;
  }
};

}  // namespace bcood

#endif  // BCOOD_WORLD_H_
