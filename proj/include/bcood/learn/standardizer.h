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

#ifndef BCOOD_LEARN_STANDARDIZER_H_
#define BCOOD_LEARN_STANDARDIZER_H_

#include <Eigen/Core>

namespace bcood::learn {

// Per-dimension zero-mean / unit-variance map. Standard deviations are
// floored at kMinStd so constant features map to zero.
struct Standardizer {
  static constexpr double kMinStd = 1e-8;

  Eigen::VectorXd mean;
  Eigen::VectorXd std;

  // Columns are samples; `weights` (optional, one per column) excludes
  // columns with weight 0.
  static Standardizer fit(const Eigen::MatrixXd& samples,
                          const Eigen::VectorXd* weights = nullptr);
  static Standardizer identity(int dim);

  int dim() const { return static_cast<int>(mean.size()); }

  // Both accept matrices whose row count is a multiple of dim(); each block
  // of dim() rows is mapped with the same statistics.
  Eigen::MatrixXd apply(const Eigen::MatrixXd& x) const;
  Eigen::MatrixXd invert(const Eigen::MatrixXd& z) const;
};

}  // namespace bcood::learn

#endif  // BCOOD_LEARN_STANDARDIZER_H_
