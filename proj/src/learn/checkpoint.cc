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

#include "bcood/learn/checkpoint.h"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace bcood::learn {

using json = nlohmann::ordered_json;

namespace {

constexpr char kMagic[8] = {'B', 'C', 'O', 'O', 'D', 'C', 'K', 'P'};

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}
void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}
std::uint64_t get_le(const std::string& in, std::size_t at, int bytes) {
  if (at + bytes > in.size()) throw std::runtime_error("checkpoint truncated");
  std::uint64_t v = 0;
  for (int i = 0; i < bytes; ++i) {
    v |= std::uint64_t{static_cast<unsigned char>(in[at + i])} << (8 * i);
  }
  return v;
}

json vec_json(const Eigen::VectorXd& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}
Eigen::VectorXd vec_from(const json& a) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(a.size()));
  for (std::size_t i = 0; i < a.size(); ++i) v[static_cast<Eigen::Index>(i)] = a[i].get<double>();
  return v;
}

json mlp_json(const MlpSpec& s) {
  return {{"input_dim", s.input_dim},   {"output_dim", s.output_dim},
          {"hidden_layers", s.hidden_layers}, {"hidden_dim", s.hidden_dim},
          {"dropout_p", s.dropout_p},   {"l2_weight", s.l2_weight}};
}
MlpSpec mlp_from(const json& j) {
  MlpSpec s;
  s.input_dim = j.at("input_dim");
  s.output_dim = j.at("output_dim");
  s.hidden_layers = j.at("hidden_layers");
  s.hidden_dim = j.at("hidden_dim");
  s.dropout_p = j.at("dropout_p");
  s.l2_weight = j.at("l2_weight");
  return s;
}

json diffusion_json(const DiffusionSpec& d) {
  return {{"obs_horizon", d.obs_horizon},     {"pred_horizon", d.pred_horizon},
          {"exec_horizon", d.exec_horizon},   {"denoise_steps", d.denoise_steps},
          {"beta_start", d.beta_start},       {"beta_end", d.beta_end},
          {"time_embed_dim", d.time_embed_dim}, {"denoiser", mlp_json(d.denoiser)}};
}
DiffusionSpec diffusion_from(const json& j) {
  DiffusionSpec d;
  d.obs_horizon = j.at("obs_horizon");
  d.pred_horizon = j.at("pred_horizon");
  d.exec_horizon = j.at("exec_horizon");
  d.denoise_steps = j.at("denoise_steps");
  d.beta_start = j.at("beta_start");
  d.beta_end = j.at("beta_end");
  d.time_embed_dim = j.at("time_embed_dim");
  d.denoiser = mlp_from(j.at("denoiser"));
  return d;
}

json train_json(const TrainConfig& t) {
  return {{"learning_rate", t.learning_rate}, {"batch_size", t.batch_size},
          {"epochs", t.epochs}, {"seed", t.seed}};
}
TrainConfig train_from(const json& j) {
  TrainConfig t;
  t.learning_rate = j.at("learning_rate");
  t.batch_size = j.at("batch_size");
  t.epochs = j.at("epochs");
  t.seed = j.at("seed");
  return t;
}

}  // namespace

json space_to_json(const SpaceSpec& s) {
  return {{"kind", std::string(to_string(s.kind))},
          {"lambda", s.lambda ? json(s.lambda->value()) : json(nullptr)},
          {"obs_horizon", s.obs_horizon},
          {"drop_trivial_ee", s.drop_trivial_ee}};
}

SpaceSpec space_from_json(const json& j) {
  SpaceSpec s;
  s.kind = space_kind_from_string(j.at("kind").get<std::string>());
  if (!j.at("lambda").is_null()) s.lambda = ProjectionRadius(j.at("lambda").get<double>());
  s.obs_horizon = j.at("obs_horizon");
  s.drop_trivial_ee = j.at("drop_trivial_ee");
  s.validate();
  return s;
}

json Checkpoint::hyperparameters() const {
  json h;
  h["kind"] = std::string(to_string(kind));
  json n = mlp_json(net);
  n.erase("input_dim");
  n.erase("output_dim");
  h["net"] = n;
  json t = train_json(train);
  t.erase("seed");
  h["train"] = t;
  if (diffusion) {
    json d = diffusion_json(*diffusion);
    d.erase("denoiser");
    h["diffusion"] = d;
  }
  return h;
}

std::string serialize_checkpoint(const Checkpoint& c) {
  const MlpSpec& net = c.net;
  if (c.weights.size() != net.num_params()) {
    throw std::invalid_argument("checkpoint weights do not match the network spec");
  }
  json h;
  h["format"] = "bcood-checkpoint";
  h["kind"] = std::string(to_string(c.kind));
  h["space"] = space_to_json(c.space);
  h["num_entities"] = c.num_entities;
  h["net"] = mlp_json(net);
  h["diffusion"] = c.diffusion ? diffusion_json(*c.diffusion) : json(nullptr);
  json shapes = json::array();
  for (auto [o, i] : net.layer_shapes()) shapes.push_back({o, i});
  h["layer_shapes"] = shapes;
  h["state_norm"] = {{"mean", vec_json(c.state_norm.mean)},
                     {"std", vec_json(c.state_norm.std)}};
  h["action_norm"] = {{"mean", vec_json(c.action_norm.mean)},
                      {"std", vec_json(c.action_norm.std)}};
  h["train"] = train_json(c.train);
  h["loss_curve"] = c.loss_curve;
  h["dataset_hash"] = c.dataset_hash;
  const std::string header = h.dump();

  std::string out(kMagic, sizeof(kMagic));
  put_u32(out, Checkpoint::kFormatVersion);
  put_u64(out, header.size());
  out += header;
  out.reserve(out.size() + 4 * static_cast<std::size_t>(c.weights.size()));
  for (Eigen::Index i = 0; i < c.weights.size(); ++i) {
    put_u32(out, std::bit_cast<std::uint32_t>(c.weights[i]));
  }
  return out;
}

Checkpoint deserialize_checkpoint(const std::string& bytes) {
  if (bytes.size() < 20 || std::memcmp(bytes.data(), kMagic, sizeof(kMagic)) != 0) {
    throw std::runtime_error("not a bcood checkpoint");
  }
  const auto version = static_cast<std::uint32_t>(get_le(bytes, 8, 4));
  if (version != Checkpoint::kFormatVersion) {
    throw std::runtime_error("unsupported checkpoint version " + std::to_string(version));
  }
  const std::uint64_t hlen = get_le(bytes, 12, 8);
  if (20 + hlen > bytes.size()) throw std::runtime_error("checkpoint truncated");
  const json h = json::parse(bytes.substr(20, hlen));

  Checkpoint c;
  c.kind = policy_kind_from_string(h.at("kind").get<std::string>());
  c.space = space_from_json(h.at("space"));
  c.num_entities = h.at("num_entities");
  c.net = mlp_from(h.at("net"));
  if (!h.at("diffusion").is_null()) c.diffusion = diffusion_from(h.at("diffusion"));
  c.state_norm = {vec_from(h.at("state_norm").at("mean")),
                  vec_from(h.at("state_norm").at("std"))};
  c.action_norm = {vec_from(h.at("action_norm").at("mean")),
                   vec_from(h.at("action_norm").at("std"))};
  c.train = train_from(h.at("train"));
  c.loss_curve = h.at("loss_curve").get<std::vector<double>>();
  c.dataset_hash = h.at("dataset_hash").get<std::string>();

  const std::int64_t n = c.net.num_params();
  const std::size_t at = 20 + hlen;
  if (bytes.size() != at + 4 * static_cast<std::size_t>(n)) {
    throw std::runtime_error("checkpoint weight payload has the wrong size");
  }
  c.weights.resize(n);
  for (std::int64_t i = 0; i < n; ++i) {
    c.weights[i] = std::bit_cast<float>(
        static_cast<std::uint32_t>(get_le(bytes, at + 4 * static_cast<std::size_t>(i), 4)));
  }
  return c;
}

void save_checkpoint(const Checkpoint& c, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path);
  const std::string bytes = serialize_checkpoint(c);
  f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot read " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return deserialize_checkpoint(ss.str());
}

void write_loss_curve_csv(const Checkpoint& c, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write " + path);
  f << "epoch,mean_loss\n";
  f.precision(17);
  for (std::size_t e = 0; e < c.loss_curve.size(); ++e) {
    f << e + 1 << ',' << c.loss_curve[e] << '\n';
  }
}

}  // namespace bcood::learn
