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

#ifndef BCOOD_LEARN_ADAM_H_
#define BCOOD_LEARN_ADAM_H_

#include <cmath>
#include <cstdint>
#include <stdexcept>

#include <Eigen/Core>

namespace bcood::learn {

template <typename Scalar>
struct AdamState {
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  Vector m;
  Vector v;
  std::int64_t step = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  explicit AdamState(Eigen::Index n = 0)
      : m(Vector::Zero(n)), v(Vector::Zero(n)) {}
};

// One bias-corrected Adam update of `params` in place.
template <typename Scalar>
void adam_step(Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& params,
               const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& grad,
               AdamState<Scalar>& state, double lr) {
  if (grad.size() != params.size() || state.m.size() != params.size()) {
    throw std::invalid_argument("adam_step: shape mismatch");
  }
  ++state.step;
  const auto b1 = static_cast<Scalar>(state.beta1);
  const auto b2 = static_cast<Scalar>(state.beta2);
  state.m = b1 * state.m + (Scalar(1) - b1) * grad;
  state.v = b2 * state.v + (Scalar(1) - b2) * grad.cwiseAbs2();
  const double t = static_cast<double>(state.step);
  const auto c1 = static_cast<Scalar>(1.0 / (1.0 - std::pow(state.beta1, t)));
  const auto c2 = static_cast<Scalar>(1.0 / (1.0 - std::pow(state.beta2, t)));
  const auto step = static_cast<Scalar>(lr);
  const auto eps = static_cast<Scalar>(state.eps);
  params.array() -= step * (state.m.array() * c1) /
                    ((state.v.array() * c2).sqrt() + eps);
}

}  // namespace bcood::learn

#endif  // BCOOD_LEARN_ADAM_H_
