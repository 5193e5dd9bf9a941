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

// Checkpoint container:
//
//   offset 0   8 bytes   magic "BCOODCKP"
//   offset 8   u32 LE    format version
//   offset 12  u64 LE    header length H
//   offset 20  H bytes   UTF-8 JSON header (space, network and training
//                        specs, layer shapes, standardiser arrays, loss curve)
//   then       f32 LE    weights, layer by layer (W column-major, then b)

#ifndef BCOOD_LEARN_CHECKPOINT_H_
#define BCOOD_LEARN_CHECKPOINT_H_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "bcood/learn/config.h"
#include "bcood/learn/standardizer.h"
#include "bcood/spaces.h"
#include "json.hpp"

namespace bcood::learn {

struct Checkpoint {
  static constexpr std::uint32_t kFormatVersion = 1;

  PolicyKind kind = PolicyKind::kMlp;
  SpaceSpec space;
  int num_entities = 1;
  MlpSpec net;  // the policy network, or the denoiser
  std::optional<DiffusionSpec> diffusion;
  Standardizer state_norm;
  Standardizer action_norm;  // per action component (dx, dy)
  Eigen::VectorXf weights;
  TrainConfig train;
  std::vector<double> loss_curve;
  std::string dataset_hash;

  // Everything except the seed and the data-dependent network dims; equal
  // across problem spaces for a fair comparison.
  nlohmann::ordered_json hyperparameters() const;
};

std::string serialize_checkpoint(const Checkpoint& c);
Checkpoint deserialize_checkpoint(const std::string& bytes);

void save_checkpoint(const Checkpoint& c, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

// "epoch,mean_loss" rows.
void write_loss_curve_csv(const Checkpoint& c, const std::string& path);

nlohmann::ordered_json space_to_json(const SpaceSpec& s);
SpaceSpec space_from_json(const nlohmann::ordered_json& j);

}  // namespace bcood::learn

#endif  // BCOOD_LEARN_CHECKPOINT_H_
