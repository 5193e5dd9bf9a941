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

#include "bcood/learn/trainer.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <utility>

#include "bcood/learn/adam.h"
#include "flush_denormals.h"

namespace bcood::learn {

std::vector<int> epoch_order(int n, Rng& rng) {
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  for (int i = n - 1; i > 0; --i) {
    const auto j = static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(i) + 1));
    std::swap(order[i], order[j]);
  }
  return order;
}

Checkpoint train_mlp(const TransformedDataset& data, MlpSpec net,
                     const TrainConfig& cfg, const ProgressFn& progress) {
  const FlushDenormals ftz;
  cfg.validate();
  if (data.size() == 0) throw std::invalid_argument("train_mlp: empty dataset");
  if (data.action_horizon != 1) {
    throw std::invalid_argument("train_mlp: expects single-step actions");
  }
  net.input_dim = static_cast<int>(data.states.rows());
  net.output_dim = 2;
  net.validate();

  Checkpoint ckpt;
  ckpt.kind = PolicyKind::kMlp;
  ckpt.space = data.space;
  ckpt.num_entities = data.num_entities;
  ckpt.net = net;
  ckpt.train = cfg;
  ckpt.state_norm = Standardizer::fit(data.states);
  ckpt.action_norm = Standardizer::fit(data.actions);

  const Eigen::MatrixXf x = ckpt.state_norm.apply(data.states).cast<float>();
  const Eigen::MatrixXf y = ckpt.action_norm.apply(data.actions).cast<float>();

  Rng init_rng(mix_seed(cfg.seed, 1));
  Rng order_rng(mix_seed(cfg.seed, 2));
  Rng dropout_rng(mix_seed(cfg.seed, 3));

  Mlp<float> model(net);
  model.init_fan_in_uniform(init_rng);
  AdamState<float> adam(model.params().size());
  Eigen::VectorXf grad;
  Eigen::MatrixXf bx, by;

  const int n = data.size();
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const auto order = epoch_order(n, order_rng);
    double loss_sum = 0.0;
    int batch_index = 0;
    for (int start = 0; start < n; start += cfg.batch_size, ++batch_index) {
      const int b = std::min(cfg.batch_size, n - start);
      bx.resize(x.rows(), b);
      by.resize(y.rows(), b);
      for (int k = 0; k < b; ++k) {
        bx.col(k) = x.col(order[start + k]);
        by.col(k) = y.col(order[start + k]);
      }
      const float loss = regression_loss_and_grad<float>(model, bx, by, nullptr, true,
                                                         &dropout_rng, grad);
      if (!std::isfinite(loss)) {
        throw TrainingError("train_mlp: non-finite loss at epoch " +
                            std::to_string(epoch + 1) + ", batch " +
                            std::to_string(batch_index));
      }
      adam_step(model.params(), grad, adam, cfg.learning_rate);
      loss_sum += static_cast<double>(loss) * b;
    }
    ckpt.loss_curve.push_back(loss_sum / n);
    if (progress) progress(epoch + 1, ckpt.loss_curve.back());
  }
  ckpt.weights = model.params();
  return ckpt;
}

Mlp<float> network_from(const Checkpoint& c) {
  Mlp<float> net(c.net);
  if (c.weights.size() != net.params().size()) {
    throw std::invalid_argument("checkpoint weights do not match the network");
  }
  net.params() = c.weights;
  return net;
}

Eigen::VectorXd mlp_forward(const Checkpoint& c, const Eigen::VectorXd& x,
                            bool train_mode, Rng* rng) {
  if (x.size() != c.net.input_dim) {
    throw std::invalid_argument("mlp_forward: input has " + std::to_string(x.size()) +
                                " entries, expected " + std::to_string(c.net.input_dim));
  }
  Mlp<double> net(c.net);
  net.params() = c.weights.cast<double>();
  return net.forward(x, train_mode, rng);
}

MlpPolicyModel::MlpPolicyModel(const Checkpoint& c)
    : ckpt_(c), net_(network_from(c)) {
  if (c.kind != PolicyKind::kMlp) {
    throw std::invalid_argument("MlpPolicyModel: not an MLP checkpoint");
  }
}

Eigen::MatrixXd MlpPolicyModel::predict(const Eigen::MatrixXd& states) const {
  const Eigen::MatrixXf z = ckpt_.state_norm.apply(states).cast<float>();
  const Eigen::MatrixXf out = net_.forward(z);
  return ckpt_.action_norm.invert(out.cast<double>());
}

}  // namespace bcood::learn
