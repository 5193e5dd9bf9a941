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

// Teleoperation bridge. Wire protocol, one JSON text message per frame,
// workspace pixels, y down:
//
//   server -> client, every tick
//     {"type":"state","tick":n,"ee":[x,y],"t_pose":[x,y,theta],
//      "target":[x,y],"reward":r,"done":b}
//   server -> client, after an episode command or episode end
//     {"type":"episode","status":"recording"|"saved"|"discarded"|"aborted",
//      "episodes":n}
//   client -> server
//     {"type":"target","x":x,"y":y}
//     {"type":"episode","cmd":"start"|"end"|"discard"}
//
// Over HTTP the server frames are server-sent events on GET /stream and the
// client frames are POST /message bodies.

#ifndef BCOOD_HARNESS_TELEOP_H_
#define BCOOD_HARNESS_TELEOP_H_

#include <atomic>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <thread>

#include "bcood/harness/collect.h"
#include "bcood/pusht_sim.h"
#include "bcood/world.h"

namespace bcood::harness {

struct TeleopOptions {
  SamplingManifold manifold = SamplingManifold::in_distribution();
  std::uint64_t base_seed = 0;
  std::string out_path;  // dataset rewritten after every saved episode
  double tick_hz = 10.0;  // used by TeleopServer
};

// Pointer target -> end-effector offset, clipped to the simulator's step.
WorldAction target_to_action(const WorldState& s, const Vector2d& target, double max_step);

// Server-authoritative session state, independent of any transport.
// Thread-safe.
class TeleopSession {
 public:
  TeleopSession(const PushTEnv& env, TeleopOptions opt, LogFn log = {});

  // Applies a client frame. Malformed frames are logged and ignored
  // (returns false).
  bool handle_message(std::string_view text);

  // Advances one tick: while recording, the latest target (or a zero action
  // when none arrived since the previous tick) is stepped and recorded.
  // Returns the state frame.
  std::string tick();

  // Client went away: an episode in progress is aborted and dropped.
  void disconnect();

  // Frames queued by episode commands since the last call.
  std::deque<std::string> take_events();

  bool recording() const;
  std::int64_t ticks() const;
  int episodes_started() const;
  int aborted_episodes() const;
  WorldState state() const;
  Dataset dataset() const;

 private:
  void start_locked();
  void finish_locked(const char* status, bool keep);
  std::string state_frame_locked(bool done) const;
  void event_locked(const char* status);

  PushTEnv env_;
  TeleopOptions opt_;
  LogFn log_;
  mutable std::mutex mu_;
  WorldState state_;
  bool recording_ = false;
  bool last_done_ = false;
  std::optional<Vector2d> pending_target_;
  Episode current_;
  Dataset dataset_;
  std::int64_t ticks_ = 0;
  int started_ = 0;
  int aborted_ = 0;
  std::deque<std::string> events_;
};

// HTTP transport for a TeleopSession. A single client at a time: a second
// GET /stream is refused with 409 while one is connected.
class TeleopServer {
 public:
  explicit TeleopServer(TeleopSession& session, double tick_hz = 10.0, LogFn log = {});
  ~TeleopServer();
  TeleopServer(const TeleopServer&) = delete;
  TeleopServer& operator=(const TeleopServer&) = delete;

  // Binds (port 0 picks a free port) and starts serving in the background.
  bool start(const std::string& host, int port);
  int port() const { return port_; }
  void stop();
  bool client_connected() const { return connected_.load(); }

 private:
  struct Impl;
  void tick_loop();

  TeleopSession& session_;
  double tick_hz_;
  LogFn log_;
  std::unique_ptr<Impl> impl_;
  int port_ = 0;
  std::atomic<bool> running_{false};
  std::atomic<bool> connected_{false};
  std::thread http_thread_;
  std::thread tick_thread_;
  std::mutex out_mu_;
  std::condition_variable out_cv_;
  std::deque<std::string> outbox_;
  std::uint64_t client_generation_ = 0;
};

}  // namespace bcood::harness

#endif  // BCOOD_HARNESS_TELEOP_H_
