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

#include "bcood/spaces.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include "json.hpp"

namespace bcood {

std::string_view to_string(SpaceKind k) {
  switch (k) {
    case SpaceKind::kWorld: return "p";
    case SpaceKind::kEeFrame: return "t1";
    case SpaceKind::kLocalBall: return "t2";
  }
  return "p";
}

SpaceKind space_kind_from_string(std::string_view s) {
  if (s == "p" || s == "P") return SpaceKind::kWorld;
  if (s == "t1" || s == "T1") return SpaceKind::kEeFrame;
  if (s == "t2" || s == "T2") return SpaceKind::kLocalBall;
  throw std::invalid_argument("unknown problem space: " + std::string(s));
}

void SpaceSpec::validate() const {
  if (obs_horizon < 1) {
    throw std::invalid_argument("obs_horizon must be >= 1");
  }
  if (kind == SpaceKind::kLocalBall && !lambda) {
    throw std::invalid_argument("space t2 requires a projection radius");
  }
  if (drop_trivial_ee && obs_horizon != 1) {
    throw std::invalid_argument(
        "drop_trivial_ee is only valid for single-step observation windows");
  }
  if (drop_trivial_ee && kind == SpaceKind::kWorld) {
    throw std::invalid_argument("the world-frame ee entry is never trivial");
  }
}

SpaceSpec SpaceSpec::world(int obs_horizon) {
  return {SpaceKind::kWorld, std::nullopt, obs_horizon, false};
}

SpaceSpec SpaceSpec::ee_frame(int obs_horizon) {
  return {SpaceKind::kEeFrame, std::nullopt, obs_horizon, obs_horizon == 1};
}

SpaceSpec SpaceSpec::local_ball(double lambda, int obs_horizon) {
  return {SpaceKind::kLocalBall, ProjectionRadius(lambda), obs_horizon,
          obs_horizon == 1};
}

bool operator==(const SpaceSpec& a, const SpaceSpec& b) {
  const bool same_lambda =
      a.lambda.has_value() == b.lambda.has_value() &&
      (!a.lambda || a.lambda->value() == b.lambda->value());
  return a.kind == b.kind && same_lambda && a.obs_horizon == b.obs_horizon &&
         a.drop_trivial_ee == b.drop_trivial_ee;
}

namespace {

int per_step_dim(const SpaceSpec& spec, int num_entities) {
  return (spec.drop_trivial_ee ? 0 : 2) + 4 * num_entities + 2;
}

}  // namespace

int state_dim(const SpaceSpec& spec, int num_entities) {
  return spec.obs_horizon * per_step_dim(spec, num_entities);
}

std::vector<std::string> state_layout(const SpaceSpec& spec,
                                      int num_entities) {
  spec.validate();
  std::vector<std::string> out;
  const std::string space(to_string(spec.kind));
  for (int k = 0; k < spec.obs_horizon; ++k) {
    const std::string step =
        space + ".t" + std::to_string(k - spec.obs_horizon + 1) + ".";
    if (!spec.drop_trivial_ee) {
      out.push_back(step + "ee.x");
      out.push_back(step + "ee.y");
    }
    for (int i = 0; i < num_entities; ++i) {
      const std::string e = step + "entity" + std::to_string(i) + ".";
      for (const char* f : {"x", "y", "cos", "sin"}) out.push_back(e + f);
    }
    out.push_back(step + "target.x");
    out.push_back(step + "target.y");
  }
  return out;
}

Pose2d action_frame(const WorldState& newest, const SpaceSpec& spec) {
  if (spec.kind == SpaceKind::kWorld) return Pose2d::identity();
  return newest.ee;
}

EncodedState encode_state(std::span<const WorldState> window,
                          const SpaceSpec& spec) {
  spec.validate();
  if (static_cast<int>(window.size()) != spec.obs_horizon) {
    throw std::invalid_argument("encode_state: window length " +
                                std::to_string(window.size()) +
                                " does not match obs_horizon " +
                                std::to_string(spec.obs_horizon));
  }
  const int num_entities = static_cast<int>(window.back().entities.size());
  EncodedState out;
  out.frame_e = action_frame(window.back(), spec);
  out.features.resize(state_dim(spec, num_entities));

  const bool project = spec.kind == SpaceKind::kLocalBall;
  int j = 0;
  auto put2 = [&](const Vector2d& v) {
    out.features[j++] = v.x();
    out.features[j++] = v.y();
  };
  for (const WorldState& s : window) {
    if (static_cast<int>(s.entities.size()) != num_entities) {
      throw std::invalid_argument("encode_state: entity count changed in window");
    }
    if (!spec.drop_trivial_ee) {
      // The end-effector entry itself is never projected.
      put2(express_in_frame(out.frame_e, s.ee).position);
    }
    for (const Pose2d& e : s.entities) {
      Pose2d local = express_in_frame(out.frame_e, e);
      if (project) local = project_lambda(local, *spec.lambda);
      put2(local.position);
      out.features[j++] = std::cos(local.theta);
      out.features[j++] = std::sin(local.theta);
    }
    Vector2d target =
        rotate_vector_into_frame(out.frame_e, Vector2d(s.target - out.frame_e.position));
    if (project) target = project_position(target, *spec.lambda);
    put2(target);
  }
  return out;
}

Vector2d encode_action(const WorldAction& a, const Pose2d& frame_e) {
  return rotate_vector_into_frame(frame_e, a.delta);
}

WorldAction decode_action(const Vector2d& v, const Pose2d& frame_e) {
  return {rotate_vector_out_of_frame(frame_e, v)};
}

TransformedDataset transform_dataset(const Dataset& d, const SpaceSpec& spec,
                                     int action_horizon) {
  spec.validate();
  if (action_horizon < 1) {
    throw std::invalid_argument("action_horizon must be >= 1");
  }
  if (d.episodes.empty()) {
    throw std::invalid_argument("transform_dataset: dataset has no episodes");
  }
  const int num_entities =
      d.episodes.front().steps.empty()
          ? 0
          : static_cast<int>(d.episodes.front().steps.front().state.entities.size());
  std::size_t n = 0;
  for (std::size_t e = 0; e < d.episodes.size(); ++e) {
    if (d.episodes[e].steps.empty()) {
      throw std::invalid_argument("transform_dataset: episode " +
                                  std::to_string(d.episodes[e].episode_id) +
                                  " has no steps");
    }
    n += d.episodes[e].steps.size();
  }

  TransformedDataset out;
  out.space = spec;
  out.action_horizon = action_horizon;
  out.num_entities = num_entities;
  out.layout = state_layout(spec, num_entities);
  out.states.resize(state_dim(spec, num_entities), static_cast<Eigen::Index>(n));
  out.actions.resize(2 * action_horizon, static_cast<Eigen::Index>(n));
  out.mask.resize(action_horizon, static_cast<Eigen::Index>(n));
  out.frames.reserve(n);
  out.episode_index.reserve(n);
  out.step_index.reserve(n);

  std::vector<WorldState> window(spec.obs_horizon);
  Eigen::Index col = 0;
  for (std::size_t e = 0; e < d.episodes.size(); ++e) {
    const auto& steps = d.episodes[e].steps;
    const int len = static_cast<int>(steps.size());
    for (int t = 0; t < len; ++t) {
      for (int k = 0; k < spec.obs_horizon; ++k) {
        const int src = std::max(0, t - spec.obs_horizon + 1 + k);
        window[k] = steps[src].state;
      }
      const EncodedState enc = encode_state(window, spec);
      out.states.col(col) = enc.features;
      for (int h = 0; h < action_horizon; ++h) {
        const int src = std::min(len - 1, t + h);
        out.actions.col(col).segment<2>(2 * h) =
            encode_action(steps[src].action, enc.frame_e);
        out.mask(h, col) = (t + h < len) ? 1.0 : 0.0;
      }
      out.frames.push_back(enc.frame_e);
      out.episode_index.push_back(static_cast<int>(e));
      out.step_index.push_back(t);
      ++col;
    }
  }
  return out;
}

std::string layout_sidecar_json(const SpaceSpec& spec, int num_entities,
                                int action_horizon) {
  nlohmann::ordered_json j;
  j["format"] = "bcood-layout";
  j["version"] = 1;
  j["space"] = std::string(to_string(spec.kind));
  j["lambda"] = spec.lambda ? nlohmann::ordered_json(spec.lambda->value())
                            : nlohmann::ordered_json(nullptr);
  j["obs_horizon"] = spec.obs_horizon;
  j["drop_trivial_ee"] = spec.drop_trivial_ee;
  j["action_horizon"] = action_horizon;
  auto& entries = j["state"];
  entries = nlohmann::ordered_json::array();
  const auto names = state_layout(spec, num_entities);
  for (std::size_t i = 0; i < names.size(); ++i) {
    entries.push_back({{"index", i}, {"name", names[i]}});
  }
  auto& acts = j["action"];
  acts = nlohmann::ordered_json::array();
  for (int h = 0; h < action_horizon; ++h) {
    acts.push_back({{"index", 2 * h}, {"name", "a" + std::to_string(h) + ".dx"}});
    acts.push_back({{"index", 2 * h + 1}, {"name", "a" + std::to_string(h) + ".dy"}});
  }
  return j.dump(2);
}

void write_layout_sidecar(const std::string& path, const SpaceSpec& spec,
                          int num_entities, int action_horizon) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write " + path);
  f << layout_sidecar_json(spec, num_entities, action_horizon) << '\n';
}

}  // namespace bcood
