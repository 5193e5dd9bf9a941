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

#include "bcood/learn/standardizer.h"

#include <cmath>
#include <stdexcept>

namespace bcood::learn {

Standardizer Standardizer::fit(const Eigen::MatrixXd& samples,
                               const Eigen::VectorXd* weights) {
  const Eigen::Index d = samples.rows();
  Eigen::VectorXd w = weights ? *weights : Eigen::VectorXd::Ones(samples.cols());
  if (w.size() != samples.cols()) {
    throw std::invalid_argument("Standardizer::fit: weight count mismatch");
  }
  const double total = w.sum();
  if (!(total > 0.0)) {
    throw std::invalid_argument("Standardizer::fit: no samples");
  }
  Standardizer s;
  s.mean = (samples * w) / total;
  Eigen::VectorXd var = Eigen::VectorXd::Zero(d);
  for (Eigen::Index c = 0; c < samples.cols(); ++c) {
    if (w[c] == 0.0) continue;
    var += w[c] * (samples.col(c) - s.mean).cwiseAbs2();
  }
  var /= total;
  s.std = var.cwiseSqrt().cwiseMax(kMinStd);
  return s;
}

Standardizer Standardizer::identity(int dim) {
  return {Eigen::VectorXd::Zero(dim), Eigen::VectorXd::Ones(dim)};
}

Eigen::MatrixXd Standardizer::apply(const Eigen::MatrixXd& x) const {
  const Eigen::Index d = mean.size();
  if (d == 0 || x.rows() % d != 0) {
    throw std::invalid_argument("Standardizer::apply: dimension mismatch");
  }
  Eigen::MatrixXd z(x.rows(), x.cols());
  for (Eigen::Index b = 0; b < x.rows(); b += d) {
    z.middleRows(b, d) =
        (x.middleRows(b, d).colwise() - mean).array().colwise() / std.array();
  }
  return z;
}

Eigen::MatrixXd Standardizer::invert(const Eigen::MatrixXd& z) const {
  const Eigen::Index d = mean.size();
  if (d == 0 || z.rows() % d != 0) {
    throw std::invalid_argument("Standardizer::invert: dimension mismatch");
  }
  Eigen::MatrixXd x(z.rows(), z.cols());
  for (Eigen::Index b = 0; b < z.rows(); b += d) {
    x.middleRows(b, d) =
        (z.middleRows(b, d).array().colwise() * std.array()).matrix().colwise() +
        mean;
  }
  return x;
}

}  // namespace bcood::learn
