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

#include "bcood/learn/diffusion.h"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "bcood/learn/adam.h"
#include "flush_denormals.h"

namespace bcood::learn {

NoiseSchedule NoiseSchedule::linear(const DiffusionSpec& spec) {
  spec.validate();
  const int n = spec.denoise_steps;
  const double scale = 1000.0 / n;
  NoiseSchedule s;
  s.betas.resize(n);
  s.alphas.resize(n);
  s.alpha_bars.resize(n);
  double prod = 1.0;
  for (int k = 0; k < n; ++k) {
    const double f = n > 1 ? static_cast<double>(k) / (n - 1) : 0.0;
    const double beta =
        std::min(0.999, scale * (spec.beta_start + f * (spec.beta_end - spec.beta_start)));
    s.betas[k] = beta;
    s.alphas[k] = 1.0 - beta;
    prod *= 1.0 - beta;
    s.alpha_bars[k] = prod;
  }
  return s;
}

double NoiseSchedule::posterior_variance(int k) const {
  if (k <= 0) return 0.0;
  return betas[k] * (1.0 - alpha_bars[k - 1]) / (1.0 - alpha_bars[k]);
}

namespace {

// Action standardiser over (dx, dy), fitted on real (unpadded) steps only.
Standardizer fit_action_norm(const TransformedDataset& data) {
  const int h = data.action_horizon;
  const Eigen::Index n = data.actions.cols();
  Eigen::MatrixXd flat(2, h * n);
  Eigen::VectorXd w(h * n);
  for (Eigen::Index c = 0; c < n; ++c) {
    for (int k = 0; k < h; ++k) {
      flat.col(c * h + k) = data.actions.col(c).segment<2>(2 * k);
      w[c * h + k] = data.mask(k, c);
    }
  }
  return Standardizer::fit(flat, &w);
}

}  // namespace

Checkpoint ddpm_train(const TransformedDataset& data, DiffusionSpec spec,
                      const TrainConfig& cfg, const ProgressFn& progress) {
  const FlushDenormals ftz;
  cfg.validate();
  spec.validate();
  if (data.size() == 0) throw std::invalid_argument("ddpm_train: empty dataset");
  if (data.action_horizon != spec.pred_horizon) {
    throw std::invalid_argument("ddpm_train: dataset action_horizon " +
                                std::to_string(data.action_horizon) +
                                " does not match pred_horizon " +
                                std::to_string(spec.pred_horizon));
  }
  if (data.space.obs_horizon != spec.obs_horizon) {
    throw std::invalid_argument("ddpm_train: dataset obs_horizon does not match the spec");
  }
  const int adim = 2 * spec.pred_horizon;
  const int odim = static_cast<int>(data.states.rows());
  spec.denoiser.input_dim = adim + odim + spec.time_embed_dim;
  spec.denoiser.output_dim = adim;
  spec.denoiser.validate();

  Checkpoint ckpt;
  ckpt.kind = PolicyKind::kDiffusion;
  ckpt.space = data.space;
  ckpt.num_entities = data.num_entities;
  ckpt.net = spec.denoiser;
  ckpt.diffusion = spec;
  ckpt.train = cfg;
  ckpt.state_norm = Standardizer::fit(data.states);
  ckpt.action_norm = fit_action_norm(data);

  const NoiseSchedule sched = NoiseSchedule::linear(spec);
  const Eigen::MatrixXf x = ckpt.state_norm.apply(data.states).cast<float>();
  const Eigen::MatrixXf y = ckpt.action_norm.apply(data.actions).cast<float>();
  Eigen::MatrixXf m(adim, data.size());
  for (int k = 0; k < spec.pred_horizon; ++k) {
    m.row(2 * k) = data.mask.row(k).cast<float>();
    m.row(2 * k + 1) = data.mask.row(k).cast<float>();
  }

  Rng init_rng(mix_seed(cfg.seed, 1));
  Rng order_rng(mix_seed(cfg.seed, 2));
  Rng dropout_rng(mix_seed(cfg.seed, 3));
  Rng noise_rng(mix_seed(cfg.seed, 4));

  Mlp<float> model(spec.denoiser);
  model.init_fan_in_uniform(init_rng);
  AdamState<float> adam(model.params().size());
  Eigen::VectorXf grad;
  Eigen::MatrixXf bx, by, bm, eps;
  std::vector<int> steps;

  const int n = data.size();
  const double total_steps =
      static_cast<double>(cfg.epochs) * ((n + cfg.batch_size - 1) / cfg.batch_size);
  double step_count = 0.0;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const auto order = epoch_order(n, order_rng);
    double loss_sum = 0.0;
    int batch_index = 0;
    for (int start = 0; start < n; start += cfg.batch_size, ++batch_index) {
      const int b = std::min(cfg.batch_size, n - start);
      bx.resize(odim, b);
      by.resize(adim, b);
      bm.resize(adim, b);
      eps.resize(adim, b);
      steps.resize(b);
      for (int c = 0; c < b; ++c) {
        const int i = order[start + c];
        bx.col(c) = x.col(i);
        by.col(c) = y.col(i);
        bm.col(c) = m.col(i);
        steps[c] = static_cast<int>(
            noise_rng.uniform_index(static_cast<std::uint64_t>(sched.size())));
        for (int r = 0; r < adim; ++r) eps(r, c) = static_cast<float>(noise_rng.normal());
      }
      const float loss = diffusion_loss_and_grad<float>(
          model, sched, spec.time_embed_dim, by, bx, steps, eps, &bm, true,
          &dropout_rng, grad);
      if (!std::isfinite(loss)) {
        throw TrainingError("ddpm_train: non-finite loss at epoch " +
                            std::to_string(epoch + 1) + ", batch " +
                            std::to_string(batch_index));
      }
      // cosine decay to zero
      const double lr =
          cfg.learning_rate * 0.5 * (1.0 + std::cos(std::numbers::pi * step_count / total_steps));
      step_count += 1.0;
      adam_step(model.params(), grad, adam, lr);
      loss_sum += static_cast<double>(loss) * b;
    }
    ckpt.loss_curve.push_back(loss_sum / n);
    if (progress) progress(epoch + 1, ckpt.loss_curve.back());
  }
  ckpt.weights = model.params();
  return ckpt;
}

DiffusionPolicyModel::DiffusionPolicyModel(const Checkpoint& c)
    : ckpt_(c), net_(network_from(c)) {
  if (c.kind != PolicyKind::kDiffusion || !c.diffusion) {
    throw std::invalid_argument("DiffusionPolicyModel: not a diffusion checkpoint");
  }
  sched_ = NoiseSchedule::linear(*c.diffusion);
}

Eigen::MatrixXd DiffusionPolicyModel::sample(const Eigen::MatrixXd& obs, Rng& rng) const {
  const DiffusionSpec& d = *ckpt_.diffusion;
  const int adim = 2 * d.pred_horizon;
  const Eigen::Index b = obs.cols();
  if (obs.rows() != ckpt_.state_norm.dim()) {
    throw std::invalid_argument("DiffusionPolicyModel::sample: obs has " +
                                std::to_string(obs.rows()) + " rows, expected " +
                                std::to_string(ckpt_.state_norm.dim()));
  }
  Eigen::MatrixXf input(adim + obs.rows() + d.time_embed_dim, b);
  input.middleRows(adim, obs.rows()) = ckpt_.state_norm.apply(obs).cast<float>();

  Eigen::MatrixXd xk(adim, b);
  for (Eigen::Index c = 0; c < b; ++c) {
    for (int r = 0; r < adim; ++r) xk(r, c) = rng.normal();
  }
  std::vector<int> steps(static_cast<std::size_t>(b));
  for (int k = sched_.size() - 1; k >= 0; --k) {
    std::fill(steps.begin(), steps.end(), k);
    input.topRows(adim) = xk.cast<float>();
    input.bottomRows(d.time_embed_dim) = timestep_embedding<float>(steps, d.time_embed_dim);
    const Eigen::MatrixXd eps_hat = net_.forward(input).cast<double>();
    const double coef = sched_.betas[k] / std::sqrt(1.0 - sched_.alpha_bars[k]);
    xk = (xk - coef * eps_hat) / std::sqrt(sched_.alphas[k]);
    if (k > 0) {
      const double sigma = std::sqrt(sched_.posterior_variance(k));
      for (Eigen::Index c = 0; c < b; ++c) {
        for (int r = 0; r < adim; ++r) xk(r, c) += sigma * rng.normal();
      }
    }
  }
  return ckpt_.action_norm.invert(xk);
}

Eigen::MatrixXd ddpm_sample(const Checkpoint& c, const Eigen::VectorXd& obs, Rng& rng) {
  const DiffusionPolicyModel model(c);
  const Eigen::VectorXd flat = model.sample(obs, rng).col(0);
  const int h = model.spec().pred_horizon;
  Eigen::MatrixXd out(h, 2);
  for (int k = 0; k < h; ++k) out.row(k) = flat.segment<2>(2 * k).transpose();
  return out;
}

}  // namespace bcood::learn
