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

#include "bcood/harness/evaluate.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include "bcood/hash.h"

namespace bcood::harness {

using json = nlohmann::ordered_json;

void EvalSpec::validate() const {
  in_dist.validate();
  ood.validate();
  if (in_dist.r_max > ood.r_min) {
    throw std::invalid_argument("EvalSpec: manifolds overlap in radius");
  }
  if (n_in_dist < 0 || n_ood < 0 || n_in_dist + n_ood < 1) {
    throw std::invalid_argument("EvalSpec: need at least one evaluation episode");
  }
  if (bins < 2) throw std::invalid_argument("EvalSpec: bins must be >= 2");
}

json EvalSpec::to_json() const {
  return {{"in_dist", {in_dist.r_min, in_dist.r_max}},
          {"ood", {ood.r_min, ood.r_max}},
          {"n_in_dist", n_in_dist},
          {"n_ood", n_ood},
          {"bins", bins},
          {"seeds", seeds},
          {"eval_seed", eval_seed}};
}

EvalSpec EvalSpec::from_json(const json& j) {
  EvalSpec s;
  if (j.contains("in_dist")) s.in_dist = {j["in_dist"][0], j["in_dist"][1]};
  if (j.contains("ood")) s.ood = {j["ood"][0], j["ood"][1]};
  s.n_in_dist = j.value("n_in_dist", s.n_in_dist);
  s.n_ood = j.value("n_ood", s.n_ood);
  s.bins = j.value("bins", s.bins);
  if (j.contains("seeds")) s.seeds = j["seeds"].get<std::vector<std::uint64_t>>();
  s.eval_seed = j.value("eval_seed", s.eval_seed);
  s.validate();
  return s;
}

double distance_to_manifold(const Vector2d& position, const Vector2d& target,
                            const EvalSpec& spec) {
  const double r = (position - target).norm();
  const double lo = spec.in_dist.r_max;
  const double hi = spec.ood.r_max;
  if (r <= lo) return 0.0;
  return std::clamp((r - lo) / (hi - lo), 0.0, 1.0);
}

int distance_bin(double distance, int bins) {
  if (distance <= 0.0) return 0;
  const int k = static_cast<int>(std::ceil(distance * (bins - 1)));
  return std::clamp(k, 1, bins - 1);
}

std::pair<double, double> bin_range(int bin, int bins) {
  if (bin == 0) return {0.0, 0.0};
  return {static_cast<double>(bin - 1) / (bins - 1), static_cast<double>(bin) / (bins - 1)};
}

std::vector<EvalStart> evaluation_starts(const PushTEnv& env, const EvalSpec& spec) {
  spec.validate();
  std::vector<EvalStart> out;
  out.reserve(static_cast<std::size_t>(spec.n_in_dist + spec.n_ood));
  auto add = [&](bool in, int count) {
    const std::uint64_t stream = mix_seed(spec.eval_seed, in ? 0 : 1);
    for (int i = 0; i < count; ++i) {
      EvalStart s;
      s.index = static_cast<int>(out.size());
      s.seed = mix_seed(stream, static_cast<std::uint64_t>(i));
      s.in_dist = in;
      s.state = env.reset(s.seed, in ? spec.in_dist : spec.ood);
      s.distance = distance_to_manifold(env.anchor(s.state), s.state.target, spec);
      s.bin = distance_bin(s.distance, spec.bins);
      out.push_back(std::move(s));
    }
  };
  add(true, spec.n_in_dist);
  add(false, spec.n_ood);
  return out;
}

std::string starts_hash(const std::vector<EvalStart>& starts) {
  Fnv1a h;
  for (const EvalStart& s : starts) {
    h.u64(s.seed).f64(s.state.ee.position.x()).f64(s.state.ee.position.y());
    for (const Pose2d& e : s.state.entities) {
      h.f64(e.position.x()).f64(e.position.y()).f64(e.theta);
    }
    h.f64(s.state.target.x()).f64(s.state.target.y());
  }
  return hex64(h.value());
}

std::vector<WorldAction> FunctionController::act(
    const std::vector<int>& ids, const std::vector<const WorldState*>& states) {
  std::vector<WorldAction> out;
  out.reserve(ids.size());
  for (const WorldState* s : states) out.push_back(policy_(*s));
  return out;
}

void WindowedController::begin(int num_episodes) {
  windows_.assign(static_cast<std::size_t>(num_episodes), {});
}

void WindowedController::observe(int id, const WorldState& s) {
  auto& w = windows_.at(static_cast<std::size_t>(id));
  if (w.empty()) {
    w.assign(static_cast<std::size_t>(space_.obs_horizon), s);
    return;
  }
  std::rotate(w.begin(), w.begin() + 1, w.end());
  w.back() = s;
}

EncodedState WindowedController::encode(int id) const {
  return encode_state(windows_.at(static_cast<std::size_t>(id)), space_);
}

MlpController::MlpController(const learn::Checkpoint& c)
    : WindowedController(c.space), model_(c) {}

std::vector<WorldAction> MlpController::act(const std::vector<int>& ids,
                                            const std::vector<const WorldState*>& states) {
  const auto b = static_cast<Eigen::Index>(ids.size());
  Eigen::MatrixXd x(model_.checkpoint().net.input_dim, b);
  std::vector<Pose2d> frames(ids.size());
  for (std::size_t i = 0; i < ids.size(); ++i) {
    observe(ids[i], *states[i]);
    const EncodedState enc = encode(ids[i]);
    x.col(static_cast<Eigen::Index>(i)) = enc.features;
    frames[i] = enc.frame_e;
  }
  const Eigen::MatrixXd y = model_.predict(x);
  std::vector<WorldAction> out(ids.size());
  for (std::size_t i = 0; i < ids.size(); ++i) {
    out[i] = decode_action(y.col(static_cast<Eigen::Index>(i)), frames[i]);
  }
  return out;
}

DiffusionController::DiffusionController(const learn::Checkpoint& c, std::uint64_t seed)
    : WindowedController(c.space), model_(c), rng_(seed) {}

void DiffusionController::begin(int num_episodes) {
  WindowedController::begin(num_episodes);
  queues_.assign(static_cast<std::size_t>(num_episodes), {});
  inferences_ = 0;
  executed_ = 0;
}

std::vector<WorldAction> DiffusionController::act(
    const std::vector<int>& ids, const std::vector<const WorldState*>& states) {
  std::vector<int> need;
  std::vector<Pose2d> frames;
  Eigen::MatrixXd obs(model_.checkpoint().state_norm.dim(), 0);
  std::vector<Eigen::VectorXd> cols;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    observe(ids[i], *states[i]);
    if (queues_[static_cast<std::size_t>(ids[i])].empty()) {
      const EncodedState enc = encode(ids[i]);
      need.push_back(ids[i]);
      frames.push_back(enc.frame_e);
      cols.push_back(enc.features);
    }
  }
  if (!need.empty()) {
    obs.resize(static_cast<Eigen::Index>(cols.front().size()),
               static_cast<Eigen::Index>(cols.size()));
    for (std::size_t k = 0; k < cols.size(); ++k) obs.col(static_cast<Eigen::Index>(k)) = cols[k];
    const Eigen::MatrixXd seq = model_.sample(obs, rng_);
    const int exec = model_.spec().exec_horizon;
    for (std::size_t k = 0; k < need.size(); ++k) {
      auto& q = queues_[static_cast<std::size_t>(need[k])];
      for (int h = 0; h < exec; ++h) {
        const Vector2d a = seq.col(static_cast<Eigen::Index>(k)).segment<2>(2 * h);
        q.push_back(decode_action(a, frames[k]));
      }
    }
    inferences_ += static_cast<std::int64_t>(need.size());
  }
  std::vector<WorldAction> out(ids.size());
  for (std::size_t i = 0; i < ids.size(); ++i) {
    auto& q = queues_[static_cast<std::size_t>(ids[i])];
    out[i] = q.front();
    q.pop_front();
  }
  executed_ += static_cast<std::int64_t>(ids.size());
  return out;
}

std::vector<RolloutResult> run_lockstep(const PushTEnv& env, BatchController& ctl,
                                        const std::vector<WorldState>& starts,
                                        int horizon) {
  const int n = static_cast<int>(starts.size());
  std::vector<RolloutResult> res(starts.size());
  std::vector<WorldState> cur = starts;
  std::vector<int> live;
  for (int i = 0; i < n; ++i) {
    res[i].initial = starts[i];
    if (env.done(cur[i])) continue;
    live.push_back(i);
  }
  ctl.begin(n);
  for (int t = 0; t < horizon && !live.empty(); ++t) {
    std::vector<const WorldState*> states;
    states.reserve(live.size());
    for (int i : live) states.push_back(&cur[i]);
    const std::vector<WorldAction> acts = ctl.act(live, states);
    std::vector<int> next_live;
    for (std::size_t k = 0; k < live.size(); ++k) {
      const int i = live[k];
      if (!acts[k].delta.allFinite()) {
        res[i].aborted = true;
        continue;
      }
      StepOutcome o = env.step(cur[i], acts[k]);
      cur[i] = std::move(o.next);
      ++res[i].steps;
      if (!o.done) next_live.push_back(i);
    }
    live = std::move(next_live);
  }
  for (int i = 0; i < n; ++i) {
    res[i].final_state = cur[i];
    res[i].final_reward = env.reward(cur[i]);
  }
  return res;
}

namespace {

double sample_std(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  double m = 0.0;
  for (double x : v) m += x;
  m /= static_cast<double>(v.size());
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

}  // namespace

void compute_bins(EvalReport& r) {
  const int nb = r.num_bins;
  // seed -> per-bin (sum, count)
  std::map<std::uint64_t, std::vector<std::pair<double, int>>> per_seed;
  for (const EpisodeResult& e : r.episodes) {
    auto& v = per_seed[e.train_seed];
    if (v.empty()) v.assign(static_cast<std::size_t>(nb), {0.0, 0});
    v.at(static_cast<std::size_t>(e.bin)).first += e.final_reward;
    v.at(static_cast<std::size_t>(e.bin)).second += 1;
  }
  r.bins.clear();
  for (int b = 0; b < nb; ++b) {
    BinStats s;
    s.bin = b;
    std::tie(s.lo, s.hi) = bin_range(b, nb);
    std::vector<double> means;
    for (const auto& [seed, v] : per_seed) {
      const auto& [sum, count] = v[static_cast<std::size_t>(b)];
      s.count = count;
      if (count > 0) means.push_back(sum / count);
    }
    if (!means.empty()) {
      double m = 0.0;
      for (double x : means) m += x;
      s.mean = m / static_cast<double>(means.size());
      s.std = sample_std(means);
    }
    r.bins.push_back(s);
  }
}

EvalReport evaluate_controller(const PushTEnv& env, BatchController& ctl,
                               const EvalSpec& spec, std::uint64_t train_seed,
                               const std::string& label) {
  const std::vector<EvalStart> starts = evaluation_starts(env, spec);
  std::vector<WorldState> init;
  init.reserve(starts.size());
  for (const EvalStart& s : starts) init.push_back(s.state);
  const auto res = run_lockstep(env, ctl, init, env.config().horizon);

  EvalReport r;
  r.label = label;
  r.starts_hash = starts_hash(starts);
  r.train_seeds = {train_seed};
  r.num_bins = spec.bins;
  for (std::size_t i = 0; i < starts.size(); ++i) {
    EpisodeResult e;
    e.train_seed = train_seed;
    e.index = starts[i].index;
    e.start_seed = starts[i].seed;
    e.in_dist = starts[i].in_dist;
    e.initial_position = env.anchor(starts[i].state);
    e.initial_theta = starts[i].state.entities.at(0).theta;
    e.distance = starts[i].distance;
    e.bin = starts[i].bin;
    e.final_reward = res[i].final_reward;
    e.steps = res[i].steps;
    e.aborted = res[i].aborted;
    r.episodes.push_back(e);
  }
  compute_bins(r);
  return r;
}

EvalReport evaluate(const learn::Checkpoint& c, const PushTEnv& env, const EvalSpec& spec,
                    const std::optional<SpaceSpec>& expected) {
  if (expected && !(*expected == c.space)) {
    throw std::invalid_argument("evaluate: checkpoint space " +
                                std::string(to_string(c.space.kind)) +
                                " does not match the pipeline space " +
                                std::string(to_string(expected->kind)));
  }
  const int entities = 1;
  if (c.num_entities != entities ||
      c.state_norm.dim() != state_dim(c.space, entities)) {
    throw std::invalid_argument("evaluate: checkpoint state layout does not fit the environment");
  }
  const std::string label = std::string(to_string(c.space.kind)) + "/" +
                            std::string(learn::to_string(c.kind));
  EvalReport r;
  if (c.kind == learn::PolicyKind::kMlp) {
    MlpController ctl(c);
    r = evaluate_controller(env, ctl, spec, c.train.seed, label);
  } else {
    DiffusionController ctl(c, mix_seed(spec.eval_seed, c.train.seed));
    r = evaluate_controller(env, ctl, spec, c.train.seed, label);
  }
  r.space = std::string(to_string(c.space.kind));
  if (c.space.lambda) r.lambda = c.space.lambda->value();
  r.kind = std::string(learn::to_string(c.kind));
  r.dataset_hash = c.dataset_hash;
  return r;
}

EvalReport merge_reports(const std::vector<EvalReport>& reports) {
  if (reports.empty()) throw std::invalid_argument("merge_reports: nothing to merge");
  EvalReport r = reports.front();
  r.train_seeds.clear();
  r.episodes.clear();
  for (const EvalReport& x : reports) {
    if (x.starts_hash != r.starts_hash || x.num_bins != r.num_bins) {
      throw std::invalid_argument("merge_reports: reports use different evaluation starts");
    }
    r.train_seeds.insert(r.train_seeds.end(), x.train_seeds.begin(), x.train_seeds.end());
    r.episodes.insert(r.episodes.end(), x.episodes.begin(), x.episodes.end());
  }
  compute_bins(r);
  return r;
}

json EvalReport::to_json() const {
  json j;
  j["format"] = "bcood-report";
  j["label"] = label;
  j["space"] = space;
  j["lambda"] = lambda ? json(*lambda) : json(nullptr);
  j["kind"] = kind;
  j["dataset_hash"] = dataset_hash;
  j["starts_hash"] = starts_hash;
  j["train_seeds"] = train_seeds;
  j["num_bins"] = num_bins;
  json b = json::array();
  for (const BinStats& s : bins) {
    b.push_back({{"bin", s.bin}, {"lo", s.lo}, {"hi", s.hi}, {"mean", s.mean},
                 {"std", s.std}, {"count", s.count}});
  }
  j["bins"] = std::move(b);
  json e = json::array();
  for (const EpisodeResult& x : episodes) {
    e.push_back({{"train_seed", x.train_seed},
                 {"index", x.index},
                 {"start_seed", x.start_seed},
                 {"in_dist", x.in_dist},
                 {"x", x.initial_position.x()},
                 {"y", x.initial_position.y()},
                 {"theta", x.initial_theta},
                 {"distance", x.distance},
                 {"bin", x.bin},
                 {"final_reward", x.final_reward},
                 {"steps", x.steps},
                 {"aborted", x.aborted}});
  }
  j["episodes"] = std::move(e);
  return j;
}

EvalReport EvalReport::from_json(const json& j) {
  if (j.value("format", "") != "bcood-report") {
    throw std::runtime_error("not a bcood evaluation report");
  }
  EvalReport r;
  r.label = j.at("label");
  r.space = j.at("space");
  if (!j.at("lambda").is_null()) r.lambda = j.at("lambda").get<double>();
  r.kind = j.at("kind");
  r.dataset_hash = j.at("dataset_hash");
  r.starts_hash = j.at("starts_hash");
  r.train_seeds = j.at("train_seeds").get<std::vector<std::uint64_t>>();
  r.num_bins = j.at("num_bins");
  for (const auto& b : j.at("bins")) {
    r.bins.push_back({b.at("bin"), b.at("lo"), b.at("hi"), b.at("mean"), b.at("std"),
                      b.at("count")});
  }
  for (const auto& x : j.at("episodes")) {
    EpisodeResult e;
    e.train_seed = x.at("train_seed");
    e.index = x.at("index");
    e.start_seed = x.at("start_seed");
    e.in_dist = x.at("in_dist");
    e.initial_position = {x.at("x").get<double>(), x.at("y").get<double>()};
    e.initial_theta = x.at("theta");
    e.distance = x.at("distance");
    e.bin = x.at("bin");
    e.final_reward = x.at("final_reward");
    e.steps = x.at("steps");
    e.aborted = x.at("aborted");
    r.episodes.push_back(e);
  }
  return r;
}

std::string EvalReport::hash() const {
  return hex64(Fnv1a().str(to_json().dump()).value());
}

void save_report(const EvalReport& r, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write " + path);
  f << r.to_json().dump(1) << '\n';
}

EvalReport load_report(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot read " + path);
  return EvalReport::from_json(json::parse(f));
}

void write_bins_csv(const EvalReport& r, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write " + path);
  f.precision(10);
  f << "bin,distance_lo,distance_hi,mean_final_reward,std_across_seeds,episodes_per_seed\n";
  for (const BinStats& b : r.bins) {
    f << b.bin << ',' << b.lo << ',' << b.hi << ',' << b.mean << ',' << b.std << ','
      << b.count << '\n';
  }
}

}  // namespace bcood::harness
