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

// Denoising diffusion over flattened action sequences. The denoiser is an
// MLP whose input is
//
//   [ noisy action sequence (2*T_Ap) | obs features | timestep embedding ]
//
// and whose output is the predicted noise over the action sequence.

#ifndef BCOOD_LEARN_DIFFUSION_H_
#define BCOOD_LEARN_DIFFUSION_H_

#include <cmath>
#include <stdexcept>
#include <vector>

#include <Eigen/Core>

#include "bcood/learn/checkpoint.h"
#include "bcood/learn/config.h"
#include "bcood/learn/mlp.h"
#include "bcood/learn/trainer.h"
#include "bcood/rng.h"
#include "bcood/spaces.h"

namespace bcood::learn {

struct NoiseSchedule {
  Eigen::VectorXd betas;       // beta_k, k = 0 .. N-1
  Eigen::VectorXd alphas;      // 1 - beta_k
  Eigen::VectorXd alpha_bars;  // prod_{i<=k} alpha_i

  int size() const { return static_cast<int>(betas.size()); }

  // Linear betas. beta_start/beta_end are quoted at a 1000-step resolution
  // and scaled by 1000/N so the chain ends close to pure noise for any N.
  static NoiseSchedule linear(const DiffusionSpec& spec);

  // Variance of q(x_{k-1} | x_k, x_0); zero at k = 0.
  double posterior_variance(int k) const;
};

// Sinusoidal embedding, one column per timestep: first half sin, second
// half cos, frequencies exp(-ln(10000) * i / (half - 1)).
template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> timestep_embedding(
    const std::vector<int>& steps, int dim) {
  if (dim < 2 || dim % 2 != 0) {
    throw std::invalid_argument("timestep_embedding: dim must be even");
  }
  const int half = dim / 2;
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> out(
      dim, static_cast<Eigen::Index>(steps.size()));
  for (std::size_t c = 0; c < steps.size(); ++c) {
    for (int i = 0; i < half; ++i) {
      const double freq =
          half > 1 ? std::exp(-std::log(10000.0) * i / (half - 1)) : 1.0;
      const double arg = steps[c] * freq;
      out(i, static_cast<Eigen::Index>(c)) = static_cast<Scalar>(std::sin(arg));
      out(half + i, static_cast<Eigen::Index>(c)) = static_cast<Scalar>(std::cos(arg));
    }
  }
  return out;
}

// Epsilon-prediction loss for one batch. `x0` (2*T_Ap x B) and `obs`
// (obs_dim x B) are standardised; `noise` has the shape of `x0`; `mask`
// (same shape, optional) zeroes padded entries. Returns masked MSE + L2
// and fills `grad`.
template <typename Scalar>
Scalar diffusion_loss_and_grad(
    const Mlp<Scalar>& net, const NoiseSchedule& sched, int time_embed_dim,
    const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& x0,
    const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& obs,
    const std::vector<int>& steps,
    const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& noise,
    const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>* mask,
    bool train_mode, Rng* rng, Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& grad) {
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  const Eigen::Index a = x0.rows();
  const Eigen::Index b = x0.cols();
  if (obs.cols() != b || noise.rows() != a || noise.cols() != b ||
      static_cast<Eigen::Index>(steps.size()) != b) {
    throw std::invalid_argument("diffusion_loss_and_grad: batch shapes differ");
  }
  Matrix input(a + obs.rows() + time_embed_dim, b);
  for (Eigen::Index c = 0; c < b; ++c) {
    const double ab = sched.alpha_bars[steps[c]];
    input.col(c).head(a) = static_cast<Scalar>(std::sqrt(ab)) * x0.col(c) +
                           static_cast<Scalar>(std::sqrt(1.0 - ab)) * noise.col(c);
  }
  input.middleRows(a, obs.rows()) = obs;
  input.bottomRows(time_embed_dim) = timestep_embedding<Scalar>(steps, time_embed_dim);
  return regression_loss_and_grad<Scalar>(net, input, noise, mask, train_mode, rng, grad);
}

// Trains a denoiser on a dataset transformed with obs_horizon = T_X and
// action_horizon = T_Ap. Throws TrainingError on a non-finite loss.
Checkpoint ddpm_train(const TransformedDataset& data, DiffusionSpec spec,
                      const TrainConfig& cfg, const ProgressFn& progress = {});

// Batched inference wrapper. Observations are world-unit features, one
// column per query; samples come back de-standardised, 2*T_Ap x B, in the
// frame the features were encoded in.
class DiffusionPolicyModel {
 public:
  explicit DiffusionPolicyModel(const Checkpoint& c);

  const Checkpoint& checkpoint() const { return ckpt_; }
  const DiffusionSpec& spec() const { return *ckpt_.diffusion; }
  const NoiseSchedule& schedule() const { return sched_; }

  Eigen::MatrixXd sample(const Eigen::MatrixXd& obs, Rng& rng) const;

 private:
  Checkpoint ckpt_;
  NoiseSchedule sched_;
  Mlp<float> net_;
};

// Ancestral sampling for a single observation: returns T_Ap x 2.
Eigen::MatrixXd ddpm_sample(const Checkpoint& c, const Eigen::VectorXd& obs, Rng& rng);

}  // namespace bcood::learn

#endif  // BCOOD_LEARN_DIFFUSION_H_
