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

#ifndef BCOOD_HARNESS_COLLECT_H_
#define BCOOD_HARNESS_COLLECT_H_

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>

#include "bcood/pusht_sim.h"
#include "bcood/world.h"

namespace bcood::harness {

inline constexpr double kDemoQualityThreshold = 0.9;

class CollectionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct CollectStats {
  int attempts = 0;
  int discarded = 0;
};

using LogFn = std::function<void(const std::string&)>;

// Seed of the k-th collection attempt.
std::uint64_t collection_seed(std::uint64_t base_seed, int attempt);

// n scripted episodes with final reward >= kDemoQualityThreshold. Failing
// episodes are discarded and replaced. Throws CollectionError once more
// than half of all attempts have been discarded.
Dataset collect_scripted(const PushTEnv& env, int n, const SamplingManifold& manifold,
                         std::uint64_t base_seed, CollectStats* stats = nullptr,
                         const LogFn& log = {});

}  // namespace bcood::harness

#endif  // BCOOD_HARNESS_COLLECT_H_
