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

#ifndef BCOOD_LEARN_TRAINER_H_
#define BCOOD_LEARN_TRAINER_H_

#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "bcood/learn/checkpoint.h"
#include "bcood/learn/mlp.h"
#include "bcood/rng.h"
#include "bcood/spaces.h"

namespace bcood::learn {

class TrainingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using ProgressFn = std::function<void(int epoch, double mean_loss)>;

// Shuffled mini-batch order for one epoch.
std::vector<int> epoch_order(int n, Rng& rng);

// One-step behaviour cloning: regress the (standardised) action from the
// (standardised) state with masked MSE + L2, Adam, dropout. `net`'s dims are
// overwritten from the data. Throws TrainingError on a non-finite loss.
Checkpoint train_mlp(const TransformedDataset& data, MlpSpec net,
                     const TrainConfig& cfg, const ProgressFn& progress = {});

Mlp<float> network_from(const Checkpoint& c);

// Raw network output for a single input (no standardisation).
Eigen::VectorXd mlp_forward(const Checkpoint& c, const Eigen::VectorXd& x,
                            bool train_mode = false, Rng* rng = nullptr);

// Inference wrapper: world-unit features in, world-unit actions out.
class MlpPolicyModel {
 public:
  explicit MlpPolicyModel(const Checkpoint& c);

  const Checkpoint& checkpoint() const { return ckpt_; }
  // Columns are samples: state_dim x B in, 2 x B out.
  Eigen::MatrixXd predict(const Eigen::MatrixXd& states) const;

 private:
  Checkpoint ckpt_;
  Mlp<float> net_;
};

}  // namespace bcood::learn

#endif  // BCOOD_LEARN_TRAINER_H_
