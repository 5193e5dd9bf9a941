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

#include "bcood/harness/teleop.h"

#include <chrono>
#include <cmath>

#include "bcood/harness/dataset_io.h"
#include "bcood/rng.h"
#include "httplib.h"
#include "json.hpp"

namespace bcood::harness {

using json = nlohmann::ordered_json;

WorldAction target_to_action(const WorldState& s, const Vector2d& target, double max_step) {
  Vector2d d = target - s.ee.position;
  const double n = d.norm();
  if (n > max_step) d *= max_step / n;
  return {d};
}

TeleopSession::TeleopSession(const PushTEnv& env, TeleopOptions opt, LogFn log)
    : env_(env), opt_(std::move(opt)), log_(std::move(log)) {
  opt_.manifold.validate();
  state_ = env_.reset(mix_seed(opt_.base_seed, 0), opt_.manifold);
}

bool TeleopSession::handle_message(std::string_view text) {
  std::lock_guard<std::mutex> lock(mu_);
  auto reject = [&](const std::string& why) {
    if (log_) log_("ignoring client message (" + why + "): " + std::string(text.substr(0, 200)));
    return false;
  };
  const json j = json::parse(text, nullptr, false);
  if (j.is_discarded() || !j.is_object()) return reject("not a JSON object");
  const auto type = j.find("type");
  if (type == j.end() || !type->is_string()) return reject("missing type");
  if (*type == "target") {
    const auto x = j.find("x");
    const auto y = j.find("y");
    if (x == j.end() || y == j.end() || !x->is_number() || !y->is_number()) {
      return reject("target needs numeric x and y");
    }
    const Vector2d p(x->get<double>(), y->get<double>());
    if (!p.allFinite()) return reject("non-finite target");
    pending_target_ = p;
    return true;
  }
  if (*type == "episode") {
    const auto cmd = j.find("cmd");
    if (cmd == j.end() || !cmd->is_string()) return reject("episode needs cmd");
    if (*cmd == "start") {
      if (recording_) return reject("episode already recording");
      start_locked();
      return true;
    }
    if (*cmd == "end") {
      if (!recording_) return reject("no episode to end");
      finish_locked("saved", true);
      return true;
    }
    if (*cmd == "discard") {
      if (!recording_) return reject("no episode to discard");
      finish_locked("discarded", false);
      return true;
    }
    return reject("unknown episode cmd");
  }
  return reject("unknown type");
}

void TeleopSession::start_locked() {
  const std::uint64_t seed = mix_seed(opt_.base_seed, static_cast<std::uint64_t>(started_));
  ++started_;
  state_ = env_.reset(seed, opt_.manifold);
  current_ = Episode{};
  current_.seed = seed;
  current_.source = DemoSource::kHuman;
  recording_ = true;
  last_done_ = false;
  pending_target_.reset();
  event_locked("recording");
}

void TeleopSession::finish_locked(const char* status, bool keep) {
  recording_ = false;
  if (keep && !current_.steps.empty()) {
    current_.episode_id = static_cast<std::int64_t>(dataset_.episodes.size());
    current_.final_state = state_;
    current_.final_reward = env_.reward(state_);
    dataset_.episodes.push_back(std::move(current_));
    if (!opt_.out_path.empty()) save_dataset(dataset_, env_.config(), opt_.out_path);
  } else if (keep) {
    status = "discarded";
  }
  current_ = Episode{};
  event_locked(status);
}

void TeleopSession::event_locked(const char* status) {
  json e;
  e["type"] = "episode";
  e["status"] = status;
  e["episodes"] = dataset_.episodes.size();
  events_.push_back(e.dump());
  if (log_) log_(std::string("episode ") + status);
}

std::string TeleopSession::state_frame_locked(bool done) const {
  json s;
  s["type"] = "state";
  s["tick"] = ticks_;
  s["ee"] = {state_.ee.position.x(), state_.ee.position.y()};
  const Pose2d& t = state_.entities.at(0);
  s["t_pose"] = {t.position.x(), t.position.y(), t.theta};
  s["target"] = {state_.target.x(), state_.target.y()};
  s["reward"] = env_.reward(state_);
  s["done"] = done;
  return s.dump();
}

std::string TeleopSession::tick() {
  std::lock_guard<std::mutex> lock(mu_);
  ++ticks_;
  if (recording_) {
    const WorldAction a = pending_target_
                              ? target_to_action(state_, *pending_target_, env_.config().max_step)
                              : WorldAction{};
    StepOutcome o = env_.step(state_, a);
    current_.steps.push_back({state_, a, o.reward});
    state_ = std::move(o.next);
    last_done_ = o.done;
    if (o.done) finish_locked("saved", true);
  }
  pending_target_.reset();
  return state_frame_locked(last_done_);
}

void TeleopSession::disconnect() {
  std::lock_guard<std::mutex> lock(mu_);
  pending_target_.reset();
  if (!recording_) return;
  current_.aborted = true;
  ++aborted_;
  finish_locked("aborted", false);
}

std::deque<std::string> TeleopSession::take_events() {
  std::lock_guard<std::mutex> lock(mu_);
  std::deque<std::string> out;
  out.swap(events_);
  return out;
}

bool TeleopSession::recording() const {
  std::lock_guard<std::mutex> lock(mu_);
  return recording_;
}

std::int64_t TeleopSession::ticks() const {
  std::lock_guard<std::mutex> lock(mu_);
  return ticks_;
}

int TeleopSession::episodes_started() const {
  std::lock_guard<std::mutex> lock(mu_);
  return started_;
}

int TeleopSession::aborted_episodes() const {
  std::lock_guard<std::mutex> lock(mu_);
  return aborted_;
}

WorldState TeleopSession::state() const {
  std::lock_guard<std::mutex> lock(mu_);
  return state_;
}

Dataset TeleopSession::dataset() const {
  std::lock_guard<std::mutex> lock(mu_);
  return dataset_;
}

struct TeleopServer::Impl {
  httplib::Server http;
};

TeleopServer::TeleopServer(TeleopSession& session, double tick_hz, LogFn log)
    : session_(session), tick_hz_(tick_hz), log_(std::move(log)), impl_(std::make_unique<Impl>()) {}

TeleopServer::~TeleopServer() { stop(); }

bool TeleopServer::start(const std::string& host, int port) {
  auto& http = impl_->http;
  http.Get("/stream", [this](const httplib::Request&, httplib::Response& res) {
    bool expected = false;
    if (!connected_.compare_exchange_strong(expected, true)) {
      res.status = 409;
      res.set_content("{\"error\":\"another client is connected\"}", "application/json");
      return;
    }
    std::uint64_t gen;
    {
      std::lock_guard<std::mutex> lock(out_mu_);
      outbox_.clear();
      gen = ++client_generation_;
    }
    if (log_) log_("client connected");
    res.set_header("Cache-Control", "no-cache");
    res.set_chunked_content_provider(
        "text/event-stream",
        [this, gen](std::size_t, httplib::DataSink& sink) {
          std::deque<std::string> frames;
          {
            std::unique_lock<std::mutex> lock(out_mu_);
            out_cv_.wait_for(lock, std::chrono::milliseconds(250), [&] {
              return !outbox_.empty() || !running_.load() || client_generation_ != gen;
            });
            if (!running_.load() || client_generation_ != gen) {
              sink.done();
              return true;
            }
            frames.swap(outbox_);
          }
          for (const std::string& f : frames) {
            const std::string sse = "data: " + f + "\n\n";
            if (!sink.write(sse.data(), sse.size())) return false;
          }
          return true;
        },
        [this](bool) {
          session_.disconnect();
          connected_.store(false);
          if (log_) log_("client disconnected");
        });
  });
  http.Post("/message", [this](const httplib::Request& req, httplib::Response& res) {
    const bool ok = session_.handle_message(req.body);
    res.status = ok ? 200 : 400;
    res.set_content(ok ? "{\"ok\":true}" : "{\"ok\":false}", "application/json");
  });

  if (port == 0) {
    port_ = http.bind_to_any_port(host);
    if (port_ <= 0) return false;
  } else {
    if (!http.bind_to_port(host, port)) return false;
    port_ = port;
  }
  running_.store(true);
  http_thread_ = std::thread([this] { impl_->http.listen_after_bind(); });
  tick_thread_ = std::thread([this] { tick_loop(); });
  return true;
}

void TeleopServer::tick_loop() {
  using clock = std::chrono::steady_clock;
  const auto period = std::chrono::duration_cast<clock::duration>(
      std::chrono::duration<double>(1.0 / tick_hz_));
  auto next = clock::now() + period;
  while (running_.load()) {
    std::this_thread::sleep_until(next);
    next += period;
    if (!connected_.load()) continue;
    std::string frame = session_.tick();
    std::deque<std::string> events = session_.take_events();
    {
      std::lock_guard<std::mutex> lock(out_mu_);
      for (auto& e : events) outbox_.push_back(std::move(e));
      outbox_.push_back(std::move(frame));
    }
    out_cv_.notify_all();
  }
}

void TeleopServer::stop() {
  if (!running_.exchange(false)) return;
  out_cv_.notify_all();
  impl_->http.stop();
  if (http_thread_.joinable()) http_thread_.join();
  if (tick_thread_.joinable()) tick_thread_.join();
}

}  // namespace bcood::harness
