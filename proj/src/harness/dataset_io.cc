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

#include "bcood/harness/dataset_io.h"

#include <fstream>
#include <sstream>

#include "bcood/hash.h"
#include "json.hpp"

namespace bcood::harness {

using json = nlohmann::ordered_json;

namespace {

json vec2(const Vector2d& v) { return json::array({v.x(), v.y()}); }

Vector2d vec2_from(const json& j) {
  if (!j.is_array() || j.size() != 2) throw std::runtime_error("expected [x, y]");
  return {j[0].get<double>(), j[1].get<double>()};
}

std::string step_record(const Episode& e, const Step& s) {
  json r;
  r["episode_id"] = e.episode_id;
  r["t"] = s.state.t;
  r["source"] = std::string(to_string(e.source));
  r["seed"] = e.seed;
  json st;
  st["ee"] = vec2(s.state.ee.position);
  json ents = json::array();
  for (const Pose2d& p : s.state.entities) {
    ents.push_back(json::array({p.position.x(), p.position.y(), p.theta}));
  }
  st["entities"] = std::move(ents);
  st["target"] = vec2(s.state.target);
  r["state"] = std::move(st);
  r["action"] = vec2(s.action.delta);
  r["reward"] = s.reward;
  if (e.aborted) r["aborted"] = true;
  return r.dump();
}

}  // namespace

std::string serialize_dataset(const Dataset& d, const SimConfig& config) {
  json h;
  h["format"] = "bcood-dataset";
  h["version"] = kDatasetVersion;
  h["sim_config_hash"] = hex64(config.hash());
  json verts = json::array();
  for (const auto& v : config.t_geometry.vertices) verts.push_back(vec2(v));
  h["t_geometry"] = {{"vertices", std::move(verts)}};
  std::string out = h.dump();
  out += '\n';
  for (const Episode& e : d.episodes) {
    for (const Step& s : e.steps) {
      out += step_record(e, s);
      out += '\n';
    }
  }
  return out;
}

DatasetFile parse_dataset(const std::string& text) {
  DatasetFile out;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  bool have_header = false;
  Episode* current = nullptr;
  try {
    while (std::getline(in, line)) {
      ++line_no;
      if (line.empty()) continue;
      const json r = json::parse(line);
      if (!have_header) {
        if (r.value("format", "") != "bcood-dataset") {
          throw std::runtime_error("missing bcood-dataset header");
        }
        if (r.at("version").get<int>() != kDatasetVersion) {
          throw std::runtime_error("unsupported dataset version " +
                                   r.at("version").dump());
        }
        out.sim_config_hash = r.at("sim_config_hash").get<std::string>();
        std::vector<Vector2d> verts;
        for (const auto& v : r.at("t_geometry").at("vertices")) verts.push_back(vec2_from(v));
        out.t_geometry = TGeometry::from_vertices(std::move(verts));
        have_header = true;
        continue;
      }
      const auto id = r.at("episode_id").get<std::int64_t>();
      const int t = r.at("t").get<int>();
      if (current == nullptr || current->episode_id != id) {
        for (const Episode& e : out.dataset.episodes) {
          if (e.episode_id == id) {
            throw std::runtime_error("records of episode " + std::to_string(id) +
                                     " are not contiguous");
          }
        }
        Episode e;
        e.episode_id = id;
        e.seed = r.at("seed").get<std::uint64_t>();
        e.source = demo_source_from_string(r.at("source").get<std::string>());
        e.aborted = r.value("aborted", false);
        out.dataset.episodes.push_back(std::move(e));
        current = &out.dataset.episodes.back();
      }
      if (t != static_cast<int>(current->steps.size())) {
        throw std::runtime_error("expected t = " + std::to_string(current->steps.size()) +
                                 ", got " + std::to_string(t));
      }
      Step s;
      const json& st = r.at("state");
      s.state.t = t;
      s.state.ee.position = vec2_from(st.at("ee"));
      for (const auto& p : st.at("entities")) {
        if (!p.is_array() || p.size() != 3) throw std::runtime_error("expected [x, y, theta]");
        s.state.entities.push_back(
            Pose2d({p[0].get<double>(), p[1].get<double>()}, p[2].get<double>()));
      }
      s.state.target = vec2_from(st.at("target"));
      s.action.delta = vec2_from(r.at("action"));
      s.reward = r.at("reward").get<double>();
      current->steps.push_back(std::move(s));
      current->final_reward = current->steps.back().reward;
    }
  } catch (const DatasetFormatError&) {
    throw;
  } catch (const std::exception& ex) {
    throw DatasetFormatError("dataset line " + std::to_string(line_no) + ": " + ex.what());
  }
  if (!have_header) throw DatasetFormatError("dataset is empty (no header record)");
  return out;
}

void save_dataset(const Dataset& d, const SimConfig& config, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path);
  const std::string text = serialize_dataset(d, config);
  f.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!f) throw std::runtime_error("write failed: " + path);
}

DatasetFile load_dataset(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot read " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return parse_dataset(ss.str());
}

std::string dataset_hash(const Dataset& d) {
  Fnv1a h;
  for (const Episode& e : d.episodes) {
    for (const Step& s : e.steps) h.str(step_record(e, s)).str("\n");
  }
  return hex64(h.value());
}

}  // namespace bcood::harness
