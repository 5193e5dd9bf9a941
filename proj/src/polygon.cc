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

#include "bcood/polygon.h"

#include <algorithm>
#include <cmath>
#include <limits>

namespace bcood::polygon {

bool contains(std::span<const Vector2d> poly, const Vector2d& p) {
  bool inside = false;
  const std::size_t n = poly.size();
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const Vector2d& a = poly[i];
    const Vector2d& b = poly[j];
    if ((a.y() > p.y()) != (b.y() > p.y())) {
      const double x = (b.x() - a.x()) * (p.y() - a.y()) / (b.y() - a.y()) + a.x();
      if (p.x() < x) inside = !inside;
    }
  }
  return inside;
}

BoundaryQuery query_boundary(std::span<const Vector2d> poly,
                             const Vector2d& p) {
  BoundaryQuery q;
  double best = std::numeric_limits<double>::infinity();
  std::size_t best_edge = 0;
  const std::size_t n = poly.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Vector2d c = closest_on_segment(p, poly[i], poly[(i + 1) % n]);
    const double d = (p - c).squaredNorm();
    if (d < best) {
      best = d;
      q.closest = c;
      best_edge = i;
    }
  }
  const double dist = std::sqrt(best);
  const bool inside = contains(poly, p);
  q.signed_distance = inside ? -dist : dist;
  if (dist > 0.0) {
    q.normal = inside ? Vector2d((q.closest - p) / dist)
                      : Vector2d((p - q.closest) / dist);
  } else {
    // On the boundary: outward edge normal of a CCW loop.
    const Vector2d e = poly[(best_edge + 1) % n] - poly[best_edge];
    q.normal = Vector2d(e.y(), -e.x()).normalized();
  }
  return q;
}

double segment_distance(const Vector2d& a0, const Vector2d& a1,
                        const Vector2d& b0, const Vector2d& b1) {
  const Vector2d da = a1 - a0, db = b1 - b0;
  const double denom = cross(da, db);
  if (denom != 0.0) {
    const double s = cross(b0 - a0, db) / denom;
    const double t = cross(b0 - a0, da) / denom;
    if (s >= 0.0 && s <= 1.0 && t >= 0.0 && t <= 1.0) return 0.0;
  }
  return std::min({(a0 - closest_on_segment(a0, b0, b1)).norm(),
                   (a1 - closest_on_segment(a1, b0, b1)).norm(),
                   (b0 - closest_on_segment(b0, a0, a1)).norm(),
                   (b1 - closest_on_segment(b1, a0, a1)).norm()});
}

double segment_polygon_distance(std::span<const Vector2d> poly,
                                const Vector2d& a, const Vector2d& b) {
  if (contains(poly, a) || contains(poly, b)) return 0.0;
  double best = std::numeric_limits<double>::infinity();
  const std::size_t n = poly.size();
  for (std::size_t i = 0; i < n; ++i) {
    best = std::min(best, segment_distance(a, b, poly[i], poly[(i + 1) % n]));
  }
  return best;
}

double ray_far_exit(std::span<const Vector2d> poly, const Vector2d& origin,
                    const Vector2d& dir) {
  double far = 0.0;
  const std::size_t n = poly.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Vector2d& a = poly[i];
    const Vector2d e = poly[(i + 1) % n] - a;
    const double denom = cross(dir, e);
    if (denom == 0.0) {
      // Parallel edge: only counts when collinear with the ray.
      if (cross(a - origin, dir) != 0.0) continue;
      far = std::max({far, (a - origin).dot(dir), (a + e - origin).dot(dir)});
      continue;
    }
    const double t = cross(a - origin, e) / denom;
    const double u = cross(a - origin, dir) / denom;
    if (t >= 0.0 && u >= 0.0 && u <= 1.0) far = std::max(far, t);
  }
  return far;
}

MassProperties mass_properties(std::span<const Vector2d> poly) {
  MassProperties m;
  double a2 = 0.0;
  Vector2d c = Vector2d::Zero();
  double jo = 0.0;  // polar moment about the origin, times 12
  const std::size_t n = poly.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Vector2d& p = poly[i];
    const Vector2d& q = poly[(i + 1) % n];
    const double w = cross(p, q);
    a2 += w;
    c += w * (p + q);
    jo += w * (p.squaredNorm() + p.dot(q) + q.squaredNorm());
  }
  m.area = 0.5 * a2;
  m.centroid = c / (3.0 * a2);
  m.polar_moment = jo / 12.0 - m.area * m.centroid.squaredNorm();
  return m;
}

bool is_simple(std::span<const Vector2d> poly) {
  const std::size_t n = poly.size();
  if (n < 3) return false;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      // Adjacent edges share a vertex by construction.
      if (j == i + 1 || (i == 0 && j == n - 1)) continue;
      if (segment_distance(poly[i], poly[(i + 1) % n], poly[j],
                           poly[(j + 1) % n]) == 0.0) {
        return false;
      }
    }
  }
  return true;
}

}  // namespace bcood::polygon
