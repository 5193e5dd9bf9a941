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

// Fully connected ReLU network with inverted dropout and exact reverse-mode
// gradients. All parameters live in one flat vector so optimisers,
// checkpoints and finite-difference checks can treat them uniformly.
//
// Parameter layout, layer by layer: W_l (out x in, column-major), then b_l.
// Batches are column-major: one sample per column.

#ifndef BCOOD_LEARN_MLP_H_
#define BCOOD_LEARN_MLP_H_

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "bcood/rng.h"

namespace bcood::learn {

struct MlpSpec {
  int input_dim = 1;
  int output_dim = 1;
  int hidden_layers = 5;
  int hidden_dim = 512;
  double dropout_p = 0.05;
  double l2_weight = 1e-5;

  void validate() const {
    if (input_dim < 1 || output_dim < 1 || hidden_dim < 1 || hidden_layers < 0) {
      throw std::invalid_argument("MlpSpec: dimensions must be >= 1");
    }
    if (!(dropout_p >= 0.0 && dropout_p < 1.0)) {
      throw std::invalid_argument("MlpSpec: dropout_p must lie in [0, 1)");
    }
    if (!(l2_weight >= 0.0)) {
      throw std::invalid_argument("MlpSpec: l2_weight must be >= 0");
    }
  }

  // (out, in) of every affine layer.
  std::vector<std::pair<int, int>> layer_shapes() const {
    std::vector<std::pair<int, int>> shapes;
    int in = input_dim;
    for (int l = 0; l < hidden_layers; ++l) {
      shapes.emplace_back(hidden_dim, in);
      in = hidden_dim;
    }
    shapes.emplace_back(output_dim, in);
    return shapes;
  }

  std::int64_t num_params() const {
    std::int64_t n = 0;
    for (auto [o, i] : layer_shapes()) n += std::int64_t{o} * i + o;
    return n;
  }
};

inline bool operator==(const MlpSpec& a, const MlpSpec& b) {
  return a.input_dim == b.input_dim && a.output_dim == b.output_dim &&
         a.hidden_layers == b.hidden_layers && a.hidden_dim == b.hidden_dim &&
         a.dropout_p == b.dropout_p && a.l2_weight == b.l2_weight;
}

template <typename Scalar>
class Mlp {
 public:
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  using MatrixMap = Eigen::Map<Matrix>;
  using ConstMatrixMap = Eigen::Map<const Matrix>;
  using ConstVectorMap = Eigen::Map<const Vector>;

  // Intermediate values of a forward pass, kept for the backward pass.
  struct Tape {
    std::vector<Matrix> inputs;  // input of every layer
    std::vector<Matrix> gates;   // d(activation)/d(pre-activation), hidden only
  };

  explicit Mlp(const MlpSpec& spec) : spec_(spec) {
    spec_.validate();
    std::int64_t offset = 0;
    for (auto [o, i] : spec_.layer_shapes()) {
      layers_.push_back({o, i, offset});
      offset += std::int64_t{o} * i + o;
    }
    params_ = Vector::Zero(offset);
  }

  const MlpSpec& spec() const { return spec_; }
  int num_layers() const { return static_cast<int>(layers_.size()); }

  Vector& params() { return params_; }
  const Vector& params() const { return params_; }

  ConstMatrixMap weight(int l) const {
    const auto& L = layers_[l];
    return ConstMatrixMap(params_.data() + L.offset, L.out, L.in);
  }
  MatrixMap weight(int l) {
    const auto& L = layers_[l];
    return MatrixMap(params_.data() + L.offset, L.out, L.in);
  }
  ConstVectorMap bias(int l) const {
    const auto& L = layers_[l];
    return ConstVectorMap(params_.data() + L.offset + std::int64_t{L.out} * L.in,
                          L.out);
  }

  // Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) for weights and biases.
  void init_fan_in_uniform(Rng& rng) {
    for (const auto& L : layers_) {
      const double bound = 1.0 / std::sqrt(static_cast<double>(L.in));
      const std::int64_t n = std::int64_t{L.out} * L.in + L.out;
      for (std::int64_t k = 0; k < n; ++k) {
        params_[L.offset + k] = static_cast<Scalar>(rng.uniform(-bound, bound));
      }
    }
  }

  // Inference (train_mode = false) is deterministic; with train_mode = true
  // dropout masks are drawn from `rng`.
  Matrix forward(const Eigen::Ref<const Matrix>& x, bool train_mode = false,
                 Rng* rng = nullptr, Tape* tape = nullptr) const {
    if (x.rows() != spec_.input_dim) {
      throw std::invalid_argument(
          "Mlp::forward: input has " + std::to_string(x.rows()) +
          " rows, expected " + std::to_string(spec_.input_dim));
    }
    const bool drop = train_mode && spec_.dropout_p > 0.0;
    if (drop && rng == nullptr) {
      throw std::invalid_argument("Mlp::forward: dropout needs an rng");
    }
    if (tape) {
      tape->inputs.resize(layers_.size());
      tape->gates.resize(layers_.size() - 1);
    }
    Matrix a = x;
    for (int l = 0; l < num_layers(); ++l) {
      Matrix z = weight(l) * a;
      z.colwise() += bias(l);
      if (tape) tape->inputs[l] = std::move(a);
      if (l + 1 == num_layers()) return z;
      Matrix gate = (z.array() > Scalar(0)).template cast<Scalar>();
      if (drop) apply_dropout(gate, *rng);
      a = z.cwiseProduct(gate);
      if (tape) tape->gates[l] = std::move(gate);
    }
    return a;  // unreachable: the output layer returns above
  }

  // Accumulates parameter gradients for upstream gradient `dy` of the
  // output into `grad` (resized if needed). L2 terms are not included.
  void backward(const Tape& tape, Matrix dy, Vector& grad) const {
    if (grad.size() != params_.size()) grad = Vector::Zero(params_.size());
    for (int l = num_layers() - 1; l >= 0; --l) {
      const auto& L = layers_[l];
      MatrixMap gw(grad.data() + L.offset, L.out, L.in);
      Eigen::Map<Vector> gb(grad.data() + L.offset + std::int64_t{L.out} * L.in,
                            L.out);
      gw.noalias() += dy * tape.inputs[l].transpose();
      gb += dy.rowwise().sum();
      if (l > 0) {
        Matrix da = weight(l).transpose() * dy;
        dy = da.cwiseProduct(tape.gates[l - 1]);
      }
    }
  }

  // l2_weight * sum of squared weights (biases excluded); adds its gradient.
  Scalar add_l2(Vector& grad) const {
    const Scalar w = static_cast<Scalar>(spec_.l2_weight);
    if (w == Scalar(0)) return Scalar(0);
    Scalar sum = 0;
    for (int l = 0; l < num_layers(); ++l) {
      const auto& L = layers_[l];
      ConstVectorMap p(params_.data() + L.offset, std::int64_t{L.out} * L.in);
      Eigen::Map<Vector> g(grad.data() + L.offset, std::int64_t{L.out} * L.in);
      sum += p.squaredNorm();
      g += (Scalar(2) * w) * p;
    }
    return w * sum;
  }

 private:
  struct Layer {
    int out;
    int in;
    std::int64_t offset;
  };

  void apply_dropout(Matrix& gate, Rng& rng) const {
    const double p = spec_.dropout_p;
    const auto threshold = static_cast<std::uint32_t>(p * 4294967296.0);
    const Scalar keep_scale = static_cast<Scalar>(1.0 / (1.0 - p));
    Scalar* g = gate.data();
    const std::int64_t n = gate.size();
    for (std::int64_t k = 0; k < n; k += 2) {
      const std::uint64_t bits = rng.next_u64();
      const auto lo = static_cast<std::uint32_t>(bits);
      const auto hi = static_cast<std::uint32_t>(bits >> 32);
      g[k] = lo < threshold ? Scalar(0) : g[k] * keep_scale;
      if (k + 1 < n) g[k + 1] = hi < threshold ? Scalar(0) : g[k + 1] * keep_scale;
    }
  }

  MlpSpec spec_;
  std::vector<Layer> layers_;
  Vector params_;
};

// Element-wise masked mean squared error over a batch. `mask`, when given,
// has the shape of `pred` and weights each entry (0 excludes it). Writes
// dL/dpred into `dpred`.
template <typename Scalar>
Scalar masked_mse(const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& pred,
                  const Eigen::Ref<const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>>& target,
                  const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>* mask,
                  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& dpred) {
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  Matrix diff = pred - target;
  Scalar count = mask ? mask->sum() : static_cast<Scalar>(diff.size());
  if (count <= Scalar(0)) {
    dpred = Matrix::Zero(pred.rows(), pred.cols());
    return Scalar(0);
  }
  if (mask) diff = diff.cwiseProduct(*mask);
  const Scalar loss = diff.squaredNorm() / count;
  dpred = (Scalar(2) / count) * diff;
  return loss;
}

// Regression loss (masked MSE + L2) and its exact gradient.
template <typename Scalar>
Scalar regression_loss_and_grad(
    const Mlp<Scalar>& net,
    const Eigen::Ref<const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>>& x,
    const Eigen::Ref<const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>>& target,
    const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>* mask,
    bool train_mode, Rng* rng, Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& grad) {
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  if (x.cols() == 0) throw std::invalid_argument("empty batch");
  typename Mlp<Scalar>::Tape tape;
  const Matrix pred = net.forward(x, train_mode, rng, &tape);
  Matrix dpred;
  const Scalar data_loss = masked_mse<Scalar>(pred, target, mask, dpred);
  grad = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>::Zero(net.params().size());
  net.backward(tape, std::move(dpred), grad);
  return data_loss + net.add_l2(grad);
}

}  // namespace bcood::learn

#endif  // BCOOD_LEARN_MLP_H_
