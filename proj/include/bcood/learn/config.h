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

#ifndef BCOOD_LEARN_CONFIG_H_
#define BCOOD_LEARN_CONFIG_H_

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

#include "bcood/learn/mlp.h"

namespace bcood::learn {

enum class PolicyKind { kMlp, kDiffusion };

inline std::string_view to_string(PolicyKind k) {
  return k == PolicyKind::kMlp ? "mlp" : "diffusion";
}

inline PolicyKind policy_kind_from_string(std::string_view s) {
  if (s == "mlp") return PolicyKind::kMlp;
  if (s == "diffusion") return PolicyKind::kDiffusion;
  throw std::invalid_argument("unknown policy kind: " + std::string(s));
}

struct TrainConfig {
  double learning_rate = 1e-3;
  int batch_size = 1024;
  int epochs = 1200;
  std::uint64_t seed = 0;

  static TrainConfig mlp_defaults() { return {1e-3, 1024, 1200, 0}; }
  static TrainConfig diffusion_defaults() { return {1e-4, 256, 5010, 0}; }

  void validate() const {
    if (!(learning_rate > 0.0) || batch_size < 1 || epochs < 1) {
      throw std::invalid_argument(
          "TrainConfig: learning_rate, batch_size and epochs must be positive");
    }
  }
};

// Denoising diffusion over action sequences. The linear beta endpoints are
// given at a 1000-step reference resolution and rescaled by
// 1000 / denoise_steps, so shorter chains still end in near-pure noise.
struct DiffusionSpec {
  int obs_horizon = 2;
  int pred_horizon = 16;
  int exec_horizon = 8;
  int denoise_steps = 100;
  double beta_start = 1e-4;
  double beta_end = 2e-2;
  int time_embed_dim = 32;
  // input/output dims are filled in from the data at training time.
  MlpSpec denoiser{1, 1, 4, 256, 0.0, 1e-6};

  void validate() const {
    if (obs_horizon < 1 || pred_horizon < 1) {
      throw std::invalid_argument("DiffusionSpec: horizons must be >= 1");
    }
    if (exec_horizon < 1 || exec_horizon > pred_horizon) {
      throw std::invalid_argument(
          "DiffusionSpec: need 1 <= exec_horizon <= pred_horizon");
    }
    if (denoise_steps < 1) {
      throw std::invalid_argument("DiffusionSpec: denoise_steps must be >= 1");
    }
    if (!(beta_start > 0.0 && beta_start < beta_end)) {
      throw std::invalid_argument("DiffusionSpec: need 0 < beta_start < beta_end");
    }
    if (time_embed_dim < 2 || time_embed_dim % 2 != 0) {
      throw std::invalid_argument("DiffusionSpec: time_embed_dim must be even");
    }
  }
};

}  // namespace bcood::learn

#endif  // BCOOD_LEARN_CONFIG_H_
