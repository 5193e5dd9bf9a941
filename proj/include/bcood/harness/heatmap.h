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

#ifndef BCOOD_HARNESS_HEATMAP_H_
#define BCOOD_HARNESS_HEATMAP_H_

#include <string>
#include <vector>

#include <Eigen/Core>

#include "bcood/geometry.h"
#include "bcood/harness/evaluate.h"

namespace bcood::harness {

struct HeatmapPoint {
  Vector2d position = Vector2d::Zero();
  double reward = 0.0;
};

struct HeatmapOptions {
  int grid = 128;
  int neighbours = 12;
  double power = 2.0;
  Vector2d target{256.0, 256.0};
  double extent = 534.0;  // half-width of the square grid around the target
  double torus_inner = 32.0;
  double torus_outer = 180.0;
};

// One point per evaluation start; rewards are averaged over training seeds.
std::vector<HeatmapPoint> heatmap_points(const EvalReport& r);

// Inverse-distance-weighted interpolation at `q` from the `k` nearest
// points. Returns the exact value when q coincides with a point.
double idw(const std::vector<HeatmapPoint>& pts, const Vector2d& q, int k, double power);

// grid x grid values, row 0 at the top (smallest y, y-down), cell centres
// spanning target +- extent.
Eigen::MatrixXd idw_grid(const std::vector<HeatmapPoint>& pts, const HeatmapOptions& opt);

std::string heatmap_svg(const Eigen::MatrixXd& grid, const HeatmapOptions& opt);

struct HeatmapFiles {
  std::string csv;
  std::string svg;  // empty when fewer than 3 episodes
};

// Writes <out>.csv (x,y,final_reward) and, given at least 3 points,
// <out>.svg.
HeatmapFiles export_heatmap(const EvalReport& r, const std::string& out,
                            const HeatmapOptions& opt = {});

}  // namespace bcood::harness

#endif  // BCOOD_HARNESS_HEATMAP_H_
