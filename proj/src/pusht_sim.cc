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

#include "bcood/pusht_sim.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <utility>

#include "bcood/hash.h"
#include "bcood/polygon.h"
#include "bcood/rng.h"

namespace bcood {

namespace {

constexpr int kMaxResetAttempts = 10000;
constexpr int kRotationalIterations = 8;
constexpr int kTranslationalIterations = 16;
constexpr double kContactSlop = 1e-9;

Vector2d clip_norm(const Vector2d& v, double max_norm) {
  const double n = v.norm();
  if (n <= max_norm) return v;
  return v * (max_norm / n);
}

}  // namespace

bool WorldState::operator==(const WorldState& o) const {
  if (t != o.t || target != o.target || ee.position != o.ee.position ||
      ee.theta != o.ee.theta || entities.size() != o.entities.size()) {
    return false;
  }
  for (std::size_t i = 0; i < entities.size(); ++i) {
    if (entities[i].position != o.entities[i].position ||
        entities[i].theta != o.entities[i].theta) {
      return false;
    }
  }
  return true;
}

std::string_view to_string(DemoSource s) {
  switch (s) {
    case DemoSource::kScripted: return "scripted";
    case DemoSource::kHuman: return "human";
    case DemoSource::kPolicy: return "policy";
  }
  return "scripted";
}

DemoSource demo_source_from_string(std::string_view s) {
  if (s == "scripted") return DemoSource::kScripted;
  if (s == "human") return DemoSource::kHuman;
  if (s == "policy") return DemoSource::kPolicy;
  throw std::invalid_argument("unknown demonstration source: " + std::string(s));
}

// ---- geometry of the block ---------------------------------------------------

TGeometry TGeometry::classic() {
  // Body frame: bar on top (y in [0, 30]), stem below (y in [-90, 0]).
  return from_vertices({{-15.0, -90.0},
                        {15.0, -90.0},
                        {15.0, 0.0},
                        {60.0, 0.0},
                        {60.0, 30.0},
                        {-60.0, 30.0},
                        {-60.0, 0.0},
                        {-15.0, 0.0}});
}

TGeometry TGeometry::from_vertices(std::vector<Vector2d> vertices) {
  TGeometry g;
  g.vertices = std::move(vertices);
  const auto m = polygon::mass_properties(g.vertices);
  g.area = m.area;
  g.centroid = m.centroid;
  g.gyration_sq = m.area > 0.0 ? m.polar_moment / m.area : 0.0;
  for (const auto& v : g.vertices) {
    g.bounding_radius = std::max(g.bounding_radius, v.norm());
  }
  return g;
}

void SimConfig::validate() const {
  if (!(max_step > 0.0)) throw std::invalid_argument("max_step must be > 0");
  if (horizon < 1) throw std::invalid_argument("horizon must be >= 1");
  if (substeps < 1) throw std::invalid_argument("substeps must be >= 1");
  if (!(ee_radius > 0.0)) throw std::invalid_argument("ee_radius must be > 0");
  if (!(reward_scale > 0.0)) {
    throw std::invalid_argument("reward_scale must be > 0");
  }
  if (!(workspace.max.array() > workspace.min.array()).all()) {
    throw std::invalid_argument("workspace rectangle is empty");
  }
  if (!workspace.contains(target) || !workspace.contains(ee_start)) {
    throw std::invalid_argument("target and ee_start must lie in the workspace");
  }
  if (!polygon::is_simple(t_geometry.vertices) || !(t_geometry.area > 0.0)) {
    throw std::invalid_argument("block outline must be a simple CCW polygon");
  }
}

std::uint64_t SimConfig::hash() const {
  Fnv1a h;
  h.str("bcood.SimConfig.v1");
  for (double v : {workspace.min.x(), workspace.min.y(), workspace.max.x(),
                   workspace.max.y(), ee_radius, max_step,
                   static_cast<double>(horizon), static_cast<double>(substeps),
                   rotation_gain, success_threshold, reward_scale, target.x(),
                   target.y(), ee_start.x(), ee_start.y()}) {
    h.f64(v);
  }
  for (const auto& v : t_geometry.vertices) h.f64(v.x()).f64(v.y());
  return h.value();
}

void SamplingManifold::validate() const {
  if (!(r_min >= 0.0 && r_min < r_max) || !std::isfinite(r_max)) {
    throw std::invalid_argument("sampling manifold needs 0 <= r_min < r_max");
  }
}

double SamplingManifold::radial_cdf(double r) const {
  if (r <= r_min) return 0.0;
  if (r >= r_max) return 1.0;
  return (r * r - r_min * r_min) / (r_max * r_max - r_min * r_min);
}

Pose2d sample_manifold(const SamplingManifold& m, Rng& rng) {
  constexpr double kTwoPi = 2.0 * std::numbers::pi;
  const double lo = m.r_min * m.r_min;
  const double hi = m.r_max * m.r_max;
  const double r = std::sqrt(lo + rng.uniform() * (hi - lo));
  const double phi = kTwoPi * rng.uniform();
  const double heading = kTwoPi * rng.uniform();
  return Pose2d(r * std::cos(phi), r * std::sin(phi), heading);
}

// ---- environment -------------------------------------------------------------

PushTEnv::PushTEnv(SimConfig config) : config_(std::move(config)) {
  config_.validate();
}

std::vector<Vector2d> block_polygon(const TGeometry& geometry,
                                    const Pose2d& pose) {
  std::vector<Vector2d> out;
  out.reserve(geometry.vertices.size());
  const auto r = pose.rotation();
  for (const auto& v : geometry.vertices) {
    out.emplace_back(r * v + pose.position);
  }
  return out;
}

std::vector<Vector2d> PushTEnv::block_polygon(const Pose2d& pose) const {
  return bcood::block_polygon(config_.t_geometry, pose);
}

double PushTEnv::penetration(const WorldState& s) const {
  const auto poly = block_polygon(s.entities.at(0));
  return config_.ee_radius -
         polygon::query_boundary(poly, s.ee.position).signed_distance;
}

bool PushTEnv::block_inside_workspace(const Pose2d& pose) const {
  for (const auto& v : block_polygon(pose)) {
    if (!config_.workspace.contains(v)) return false;
  }
  return true;
}

WorldState PushTEnv::reset(std::uint64_t seed,
                           const SamplingManifold& manifold) const {
  manifold.validate();
  Rng rng(mix_seed(seed, 0x7265736574ULL));
  for (int attempt = 0; attempt < kMaxResetAttempts; ++attempt) {
    const Pose2d offset = sample_manifold(manifold, rng);
    WorldState s;
    s.ee = Pose2d(config_.ee_start, 0.0);
    s.entities = {Pose2d(config_.target + offset.position, offset.theta)};
    s.target = config_.target;
    s.t = 0;
    if (block_inside_workspace(s.entities[0]) && penetration(s) <= 0.0) {
      return s;
    }
  }
  throw std::runtime_error("reset: no admissible initial state after 10^4 draws");
}

double PushTEnv::reward(const WorldState& s) const {
  const double d = (anchor(s) - s.target).norm();
  return 1.0 - std::min(1.0, d / config_.reward_scale);
}

bool PushTEnv::done(const WorldState& s) const {
  return s.t >= config_.horizon || reward(s) >= config_.success_threshold;
}

void PushTEnv::resolve_contact(Vector2d& ee, Pose2d& block) const {
  const TGeometry& geo = config_.t_geometry;
  const double radius = config_.ee_radius;
  for (int it = 0; it < kRotationalIterations; ++it) {
    const auto poly = block_polygon(block);
    const auto q = polygon::query_boundary(poly, ee);
    const double depth = radius - q.signed_distance;
    if (depth <= kContactSlop) return;
    const Vector2d shift = -q.normal * depth;
    const Vector2d centroid = block.transform_point(geo.centroid);
    const double dtheta = config_.rotation_gain *
                          polygon::cross(q.closest - centroid, shift) /
                          geo.gyration_sq;
    const double c = std::cos(dtheta), s = std::sin(dtheta);
    const Vector2d arm = block.position - centroid;
    block.position = centroid + Vector2d(c * arm.x() - s * arm.y(),
                                         s * arm.x() + c * arm.y()) + shift;
    block.theta = wrap_angle(block.theta + dtheta);
  }
  for (int it = 0; it < kTranslationalIterations; ++it) {
    const auto q = polygon::query_boundary(block_polygon(block), ee);
    const double depth = radius - q.signed_distance;
    if (depth <= kContactSlop) return;
    block.position -= q.normal * depth;
  }
}

void PushTEnv::enforce_walls(Vector2d& ee, Pose2d& block) const {
  const Rect& ws = config_.workspace;
  const auto poly = block_polygon(block);
  Vector2d lo = poly.front(), hi = poly.front();
  for (const auto& v : poly) {
    lo = lo.cwiseMin(v);
    hi = hi.cwiseMax(v);
  }
  Vector2d shift = Vector2d::Zero();
  for (int k = 0; k < 2; ++k) {
    if (lo[k] < ws.min[k]) shift[k] = ws.min[k] - lo[k];
    if (hi[k] > ws.max[k]) shift[k] = ws.max[k] - hi[k];
  }
  if (shift.isZero(0.0)) return;
  block.position += shift;
  // The wall wins: the disc is pushed back out of the block.
  for (int it = 0; it < kTranslationalIterations; ++it) {
    const auto q = polygon::query_boundary(block_polygon(block), ee);
    const double depth = config_.ee_radius - q.signed_distance;
    if (depth <= kContactSlop) break;
    ee += q.normal * depth;
  }
  const Vector2d r = Vector2d::Constant(config_.ee_radius);
  ee = ee.cwiseMax(ws.min + r).cwiseMin(ws.max - r);
}

StepOutcome PushTEnv::step(const WorldState& s, const WorldAction& a) const {
  if (!a.delta.allFinite()) {
    throw std::invalid_argument("step: non-finite action");
  }
  StepOutcome out;
  Vector2d delta = a.delta;
  if (delta.norm() > config_.max_step) {
    delta = clip_norm(delta, config_.max_step);
    out.clipped = true;
  }
  Vector2d ee = s.ee.position;
  Pose2d block = s.entities.at(0);
  const Vector2d sub = delta / static_cast<double>(config_.substeps);
  const Vector2d r = Vector2d::Constant(config_.ee_radius);
  const Rect& ws = config_.workspace;
  for (int k = 0; k < config_.substeps; ++k) {
    ee = (ee + sub).cwiseMax(ws.min + r).cwiseMin(ws.max - r);
    resolve_contact(ee, block);
    enforce_walls(ee, block);
  }
  out.next = s;
  out.next.ee.position = ee;
  out.next.entities[0] = block;
  out.next.t = s.t + 1;
  out.reward = reward(out.next);
  out.done = done(out.next);
  return out;
}

// ---- scripted expert ---------------------------------------------------------

Vector2d ScriptedDemonstrator::standoff_point(const WorldState& s) const {
  const Vector2d a = s.entities.at(0).position;
  Vector2d away = a - s.target;
  const double dist = away.norm();
  away = dist > 0.0 ? Vector2d(away / dist) : Vector2d(0.0, 1.0);
  const auto poly = block_polygon(config_.t_geometry, s.entities[0]);
  const double exit = polygon::ray_far_exit(poly, a, away);
  return a + away * (exit + config_.ee_radius + params_.standoff_margin);
}

WorldAction ScriptedDemonstrator::operator()(const WorldState& s) const {
  const double step = config_.max_step;
  const Vector2d a = s.entities.at(0).position;
  const Vector2d p = s.ee.position;
  const Vector2d to_goal = s.target - a;
  const double dist = to_goal.norm();
  if (dist <= params_.stop_tolerance) return {};

  const Vector2d away = -to_goal / dist;
  const Vector2d rel = p - a;
  const double along = rel.dot(away);
  const Vector2d lateral = rel - along * away;

  if (along > 0.0 && lateral.norm() <= params_.lateral_tolerance) {
    // Push: drive the anchor straight at the target, re-centring on the line.
    const Vector2d v = (to_goal / dist) * std::min(step, dist) -
                       params_.lateral_gain * lateral;
    return {clip_norm(v, step)};
  }

  const Vector2d standoff = standoff_point(s);
  const auto poly = block_polygon(config_.t_geometry, s.entities[0]);
  const double clearance = config_.ee_radius + 1.0;
  if (polygon::segment_polygon_distance(poly, p, standoff) > clearance) {
    return {clip_norm(standoff - p, step)};
  }

  // Orbit the block at a safe radius, turning towards the standoff side.
  const double orbit = config_.t_geometry.bounding_radius + config_.ee_radius +
                       params_.standoff_margin;
  const double r = rel.norm();
  const Vector2d radial = r > 0.0 ? Vector2d(rel / r) : away;
  const double turn = polygon::cross(rel, away) >= 0.0 ? 1.0 : -1.0;
  const Vector2d v = turn * polygon::perp(radial) * step +
                     radial * std::clamp(orbit - r, -step, step);
  return {clip_norm(v, step)};
}

Episode rollout(const PushTEnv& env, const Policy& policy,
                const WorldState& init, int horizon) {
  Episode ep;
  WorldState s = init;
  for (int t = 0; t < horizon; ++t) {
    const WorldAction a = policy(s);
    if (!a.delta.allFinite()) {
      ep.aborted = true;
      break;
    }
    StepOutcome out = env.step(s, a);
    ep.steps.push_back({s, a, out.reward});
    s = std::move(out.next);
    if (out.done) break;
  }
  ep.final_state = s;
  ep.final_reward = env.reward(s);
  return ep;
}

}  // namespace bcood
