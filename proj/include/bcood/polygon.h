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

// Small planar polygon queries used by the push simulator and the scripted
// demonstrator. Polygons are simple, counter-clockwise vertex loops.

#ifndef BCOOD_POLYGON_H_
#define BCOOD_POLYGON_H_

#include <span>

#include "bcood/geometry.h"

namespace bcood::polygon {

inline double cross(const Vector2d& a, const Vector2d& b) {
  return a.x() * b.y() - a.y() * b.x();
}

inline Vector2d perp(const Vector2d& v) { return {-v.y(), v.x()}; }

inline Vector2d closest_on_segment(const Vector2d& p, const Vector2d& a,
                                   const Vector2d& b) {
  const Vector2d ab = b - a;
  const double len_sq = ab.squaredNorm();
  if (len_sq == 0.0) return a;
  double t = (p - a).dot(ab) / len_sq;
  t = t < 0.0 ? 0.0 : (t > 1.0 ? 1.0 : t);
  return a + t * ab;
}

// Crossing-number test; boundary points may land on either side.
bool contains(std::span<const Vector2d> poly, const Vector2d& p);

struct BoundaryQuery {
  double signed_distance = 0.0;  // negative inside
  Vector2d closest = Vector2d::Zero();
  Vector2d normal = Vector2d::UnitX();  // unit, from boundary towards p
};

BoundaryQuery query_boundary(std::span<const Vector2d> poly,
                             const Vector2d& p);

double segment_distance(const Vector2d& a0, const Vector2d& a1,
                        const Vector2d& b0, const Vector2d& b1);

// Distance between segment [a, b] and the polygon (0 if they touch or the
// segment starts inside).
double segment_polygon_distance(std::span<const Vector2d> poly,
                                const Vector2d& a, const Vector2d& b);

// Largest ray parameter t >= 0 at which origin + t * dir meets the boundary;
// 0 if the ray misses.
double ray_far_exit(std::span<const Vector2d> poly, const Vector2d& origin,
                    const Vector2d& dir);

// Area-weighted centroid, area, and polar second moment about the centroid.
struct MassProperties {
  double area = 0.0;
  Vector2d centroid = Vector2d::Zero();
  double polar_moment = 0.0;
};
MassProperties mass_properties(std::span<const Vector2d> poly);

bool is_simple(std::span<const Vector2d> poly);

}  // namespace bcood::polygon

#endif  // BCOOD_POLYGON_H_
