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

#include "bcood/harness/collect.h"

#include <cstdio>

#include "bcood/rng.h"

namespace bcood::harness {

std::uint64_t collection_seed(std::uint64_t base_seed, int attempt) {
  return mix_seed(base_seed, static_cast<std::uint64_t>(attempt));
}

Dataset collect_scripted(const PushTEnv& env, int n, const SamplingManifold& manifold,
                         std::uint64_t base_seed, CollectStats* stats,
                         const LogFn& log) {
  if (n < 1) throw std::invalid_argument("collect_scripted: n must be >= 1");
  manifold.validate();
  const ScriptedDemonstrator demo(env.config());
  const Policy policy = [&demo](const WorldState& s) { return demo(s); };

  Dataset d;
  CollectStats st;
  while (static_cast<int>(d.episodes.size()) < n) {
    const std::uint64_t seed = collection_seed(base_seed, st.attempts++);
    Episode ep = rollout(env, policy, env.reset(seed, manifold), env.config().horizon);
    if (ep.aborted || ep.steps.empty() || ep.final_reward < kDemoQualityThreshold) {
      ++st.discarded;
      if (log) {
        char buf[128];
        std::snprintf(buf, sizeof(buf),
                      "discarding demo (seed %llu): final reward %.3f",
                      static_cast<unsigned long long>(seed), ep.final_reward);
        log(buf);
      }
      if (st.discarded > n) {
        throw CollectionError("collect_scripted: " + std::to_string(st.discarded) +
                              " of " + std::to_string(st.attempts) +
                              " demonstrations discarded; demonstrator regression?");
      }
      continue;
    }
    ep.episode_id = static_cast<std::int64_t>(d.episodes.size());
    ep.seed = seed;
    ep.source = DemoSource::kScripted;
    d.episodes.push_back(std::move(ep));
  }
  if (stats) *stats = st;
  return d;
}

}  // namespace bcood::harness
