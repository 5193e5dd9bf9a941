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

#include <cmath>
#include <limits>

#include <gtest/gtest.h>

#include "bcood/learn/adam.h"
#include "bcood/learn/checkpoint.h"
#include "bcood/learn/diffusion.h"
#include "bcood/learn/mlp.h"
#include "bcood/learn/standardizer.h"
#include "bcood/learn/trainer.h"
#include "bcood/rng.h"

namespace bcood::learn {
namespace {

using Md = Eigen::MatrixXd;
using Vd = Eigen::VectorXd;

Md random_matrix(Rng& rng, int rows, int cols, double scale = 1.0) {
  Md m(rows, cols);
  for (int c = 0; c < cols; ++c)
    for (int r = 0; r < rows; ++r) m(r, c) = scale * rng.normal();
  return m;
}

// Max relative error between the analytic gradient and central differences
// of `loss` with respect to the parameters of `net`.
template <typename LossFn>
double fd_relative_error(Mlp<double>& net, const Vd& analytic, LossFn loss) {
  const double h = 1e-5;
  double worst = 0.0;
  for (Eigen::Index k = 0; k < net.params().size(); ++k) {
    const double p = net.params()[k];
    net.params()[k] = p + h;
    const double up = loss();
    net.params()[k] = p - h;
    const double down = loss();
    net.params()[k] = p;
    const double fd = (up - down) / (2 * h);
    const double denom = std::max({std::abs(fd), std::abs(analytic[k]), 1e-6});
    worst = std::max(worst, std::abs(fd - analytic[k]) / denom);
  }
  return worst;
}

TEST(MlpForward, ZeroWeightsGiveZero) {
  Mlp<double> net(MlpSpec{4, 3, 2, 8, 0.0, 0.0});
  EXPECT_EQ(net.forward(Md::Ones(4, 5)), Md::Zero(3, 5));
}

TEST(MlpForward, IdentityLayer) {
  Mlp<double> net(MlpSpec{3, 3, 0, 1, 0.0, 0.0});
  net.weight(0) = Md::Identity(3, 3);
  Rng rng(1);
  const Md x = random_matrix(rng, 3, 4);
  EXPECT_EQ(net.forward(x), x);
}

TEST(MlpForward, EvalModeIsDeterministic) {
  Mlp<double> net(MlpSpec{5, 2, 3, 16, 0.5, 0.0});
  Rng rng(2);
  net.init_fan_in_uniform(rng);
  const Md x = random_matrix(rng, 5, 7);
  EXPECT_EQ(net.forward(x), net.forward(x));
  EXPECT_THROW(net.forward(Md::Ones(4, 1)), std::invalid_argument);
  EXPECT_THROW(net.forward(x, true, nullptr), std::invalid_argument);
}

TEST(MlpForward, CheckpointEntryPointMatchesNetwork) {
  Checkpoint c;
  c.net = MlpSpec{3, 2, 1, 4, 0.0, 0.0};
  Mlp<float> net(c.net);
  Rng rng(3);
  net.init_fan_in_uniform(rng);
  c.weights = net.params();
  const Vd x = Vd::LinSpaced(3, -1, 1);
  const Vd y = mlp_forward(c, x);
  const Eigen::VectorXf yf = net.forward(x.cast<float>());
  EXPECT_LE((y - yf.cast<double>()).cwiseAbs().maxCoeff(), 1e-6);
  EXPECT_THROW(mlp_forward(c, Vd::Zero(2)), std::invalid_argument);
}

TEST(Gradients, MseMatchesFiniteDifferences) {
  Rng rng(4);
  for (int trial = 0; trial < 20; ++trial) {
    const int in = 2 + trial % 3, out = 1 + trial % 2;
    MlpSpec spec{in, out, 1 + trial % 3, 4, 0.0, trial % 2 ? 1e-2 : 0.0};
    Mlp<double> net(spec);
    net.init_fan_in_uniform(rng);
    const Md x = random_matrix(rng, in, 6);
    const Md y = random_matrix(rng, out, 6);
    Md mask = Md::Ones(out, 6);
    mask(0, 5) = 0.0;
    const Md* m = trial % 4 == 0 ? &mask : nullptr;
    Vd grad;
    regression_loss_and_grad<double>(net, x, y, m, false, nullptr, grad);
    Vd scratch;
    const double err = fd_relative_error(net, grad, [&] {
      return regression_loss_and_grad<double>(net, x, y, m, false, nullptr, scratch);
    });
    EXPECT_LE(err, 1e-4) << "trial " << trial;
  }
}

TEST(Gradients, DiffusionLossMatchesFiniteDifferences) {
  Rng rng(5);
  DiffusionSpec ds;
  ds.denoise_steps = 10;
  ds.time_embed_dim = 4;
  const NoiseSchedule sched = NoiseSchedule::linear(ds);
  for (int trial = 0; trial < 20; ++trial) {
    const int act = 4, obs = 3, b = 5;
    Mlp<double> net(MlpSpec{act + obs + ds.time_embed_dim, act, 1 + trial % 2, 4, 0.0, 1e-3});
    net.init_fan_in_uniform(rng);
    const Md x0 = random_matrix(rng, act, b);
    const Md o = random_matrix(rng, obs, b);
    const Md noise = random_matrix(rng, act, b);
    std::vector<int> steps;
    for (int i = 0; i < b; ++i) steps.push_back(static_cast<int>(rng.uniform_index(10)));
    Md mask = Md::Ones(act, b);
    mask.bottomRows(2).col(1).setZero();
    Vd grad, scratch;
    diffusion_loss_and_grad<double>(net, sched, ds.time_embed_dim, x0, o, steps, noise, &mask,
                                    false, nullptr, grad);
    const double err = fd_relative_error(net, grad, [&] {
      return diffusion_loss_and_grad<double>(net, sched, ds.time_embed_dim, x0, o, steps, noise,
                                             &mask, false, nullptr, scratch);
    });
    EXPECT_LE(err, 1e-4) << "trial " << trial;
  }
}

TEST(Gradients, VanishAtExactFit) {
  // y = 2x + 1 reproduced exactly by a single affine layer.
  Mlp<double> net(MlpSpec{1, 1, 0, 1, 0.0, 0.0});
  net.params() << 2.0, 1.0;
  Md x(1, 4), y(1, 4);
  x << -1, 0, 0.5, 3;
  y = (2.0 * x).array() + 1.0;
  Vd grad;
  const double loss = regression_loss_and_grad<double>(net, x, y, nullptr, false, nullptr, grad);
  EXPECT_EQ(loss, 0.0);
  EXPECT_LE(grad.cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Gradients, L2ContributionIsLinearInWeight) {
  Rng rng(6);
  MlpSpec spec{3, 2, 2, 5, 0.0, 1e-3};
  Mlp<double> a(spec);
  a.init_fan_in_uniform(rng);
  spec.l2_weight = 2e-3;
  Mlp<double> b(spec);
  b.params() = a.params();
  Vd ga = Vd::Zero(a.params().size()), gb = Vd::Zero(b.params().size());
  const double la = a.add_l2(ga);
  const double lb = b.add_l2(gb);
  EXPECT_EQ(gb, 2.0 * ga);
  EXPECT_EQ(lb, 2.0 * la);
}

TEST(Dropout, ExpectationMatchesEvalMode) {
  Mlp<double> net(MlpSpec{4, 1, 1, 32, 0.3, 0.0});
  Rng rng(7);
  net.init_fan_in_uniform(rng);
  const Md x = random_matrix(rng, 4, 1);
  const double eval = net.forward(x)(0, 0);
  const int n = 10000;
  double sum = 0.0, sq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double v = net.forward(x, true, &rng)(0, 0);
    sum += v;
    sq += v * v;
  }
  const double mean = sum / n;
  const double sd = std::sqrt((sq - n * mean * mean) / (n - 1));
  EXPECT_LE(std::abs(mean - eval), 3.0 * sd / std::sqrt(n));
  EXPECT_GT(sd, 0.0);
}

TEST(Adam, ZeroGradientLeavesParameters) {
  Vd p(3);
  p << 1, -2, 3;
  const Vd before = p;
  AdamState<double> s(3);
  adam_step<double>(p, Vd::Zero(3), s, 0.1);
  EXPECT_EQ(p, before);
  EXPECT_EQ(s.step, 1);
}

TEST(Adam, FirstStepByHand) {
  Vd p(2), g(2);
  p << 1.0, 1.0;
  g << 0.5, -2.0;
  AdamState<double> s(2);
  adam_step<double>(p, g, s, 0.1);
  // m_hat = g, v_hat = g^2, so the step is lr * g / (|g| + eps).
  EXPECT_NEAR(p[0], 1.0 - 0.1 * 0.5 / (0.5 + 1e-8), 1e-15);
  EXPECT_NEAR(p[1], 1.0 + 0.1 * 2.0 / (2.0 + 1e-8), 1e-15);
}

TEST(Adam, ResumedStateMatchesContinuousRun) {
  Vd g1(2), g2(2);
  g1 << 0.3, -0.1;
  g2 << -0.2, 0.4;
  Vd p = Vd::Ones(2);
  AdamState<double> s(2);
  adam_step<double>(p, g1, s, 0.01);
  adam_step<double>(p, g2, s, 0.01);

  Vd q = Vd::Ones(2);
  AdamState<double> s1(2);
  adam_step<double>(q, g1, s1, 0.01);
  AdamState<double> resumed = s1;  // as if reloaded
  Vd q2 = q;
  adam_step<double>(q2, g2, resumed, 0.01);
  EXPECT_EQ(p, q2);
  EXPECT_EQ(resumed.step, 2);
}

TEST(Standardizer, RoundTripAndFloor) {
  Rng rng(8);
  Md x = random_matrix(rng, 3, 50, 40.0);
  x.row(2).setConstant(7.0);
  const Standardizer s = Standardizer::fit(x);
  EXPECT_EQ(s.std[2], Standardizer::kMinStd);
  EXPECT_LE((s.invert(s.apply(x)) - x).cwiseAbs().maxCoeff(), 1e-9);
  const Md z = s.apply(x);
  EXPECT_LE(z.topRows(2).rowwise().mean().cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Standardizer, WeightsExcludeColumns) {
  Md x(1, 4);
  x << 1, 3, 100, -50;
  Vd w(4);
  w << 1, 1, 0, 0;
  const Standardizer s = Standardizer::fit(x, &w);
  EXPECT_DOUBLE_EQ(s.mean[0], 2.0);
  EXPECT_DOUBLE_EQ(s.std[0], 1.0);
  // Stacked blocks share statistics.
  Md stacked(2, 1);
  stacked << 2, 4;
  const Md z = s.apply(stacked);
  EXPECT_DOUBLE_EQ(z(0, 0), 0.0);
  EXPECT_DOUBLE_EQ(z(1, 0), 2.0);
  EXPECT_THROW(Standardizer::fit(x, &(w = Vd::Zero(4))), std::invalid_argument);
}

TransformedDataset toy_regression(int n, std::uint64_t seed) {
  Rng rng(seed);
  TransformedDataset d;
  d.space = SpaceSpec::world(1);
  d.num_entities = 1;
  d.states = random_matrix(rng, 8, n);
  d.actions.resize(2, n);
  d.actions.row(0) = 3.0 * d.states.row(0) - d.states.row(1);
  d.actions.row(1) = d.states.row(2).array().sin();
  d.mask = Md::Ones(1, n);
  return d;
}

TEST(TrainMlp, DeterministicAndLearns) {
  const TransformedDataset d = toy_regression(256, 9);
  const MlpSpec spec{1, 1, 2, 32, 0.05, 1e-5};
  const TrainConfig cfg{3e-3, 64, 60, 11};
  const Checkpoint a = train_mlp(d, spec, cfg);
  const Checkpoint b = train_mlp(d, spec, cfg);
  EXPECT_EQ(a.weights, b.weights);
  EXPECT_EQ(a.loss_curve, b.loss_curve);
  EXPECT_EQ(serialize_checkpoint(a), serialize_checkpoint(b));
  ASSERT_EQ(a.loss_curve.size(), 60u);
  EXPECT_LT(a.loss_curve.back(), 0.3 * a.loss_curve.front());
  TrainConfig other = cfg;
  other.seed = 12;
  EXPECT_NE(train_mlp(d, spec, other).weights, a.weights);
}

TEST(TrainMlp, NonFiniteLossRaises) {
  TransformedDataset d = toy_regression(64, 10);
  d.states(0, 3) = std::numeric_limits<double>::quiet_NaN();
  try {
    train_mlp(d, MlpSpec{1, 1, 1, 8, 0.0, 0.0}, TrainConfig{1e-3, 16, 2, 0});
    FAIL() << "expected TrainingError";
  } catch (const TrainingError& e) {
    EXPECT_NE(std::string(e.what()).find("batch"), std::string::npos);
  }
}

TEST(Checkpoint, SerializationRoundTrip) {
  const TransformedDataset d = toy_regression(64, 13);
  Checkpoint c = train_mlp(d, MlpSpec{1, 1, 1, 8, 0.1, 1e-5}, TrainConfig{1e-3, 16, 3, 5});
  c.dataset_hash = "00ff";
  const std::string bytes = serialize_checkpoint(c);
  const Checkpoint r = deserialize_checkpoint(bytes);
  EXPECT_EQ(r.weights, c.weights);
  EXPECT_EQ(r.loss_curve, c.loss_curve);
  EXPECT_EQ(r.state_norm.mean, c.state_norm.mean);
  EXPECT_EQ(r.action_norm.std, c.action_norm.std);
  EXPECT_TRUE(r.space == c.space);
  EXPECT_TRUE(r.net == c.net);
  EXPECT_EQ(r.dataset_hash, "00ff");
  EXPECT_EQ(serialize_checkpoint(r), bytes);
  EXPECT_EQ(r.hyperparameters(), c.hyperparameters());
  EXPECT_THROW(deserialize_checkpoint("garbage"), std::exception);
}

TEST(MlpPolicy, PredictIsDestandardised) {
  const TransformedDataset d = toy_regression(64, 14);
  const Checkpoint c = train_mlp(d, MlpSpec{1, 1, 1, 8, 0.0, 0.0}, TrainConfig{1e-3, 16, 1, 0});
  const MlpPolicyModel m(c);
  const Md out = m.predict(d.states.leftCols(3));
  ASSERT_EQ(out.rows(), 2);
  for (int k = 0; k < 3; ++k) {
    const Vd z = c.state_norm.apply(d.states.col(k));
    const Vd raw = c.action_norm.invert(mlp_forward(c, z));
    EXPECT_LE((raw - out.col(k)).cwiseAbs().maxCoeff(), 1e-4);
  }
}

}  // namespace
}  // namespace bcood::learn
