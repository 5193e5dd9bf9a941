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

// Line-delimited dataset files. The first line is a header record
//
//   {"format":"bcood-dataset","version":1,"sim_config_hash":"...",
//    "t_geometry":{"vertices":[[x,y],...]}}
//
// followed by one record per step:
//
//   {"episode_id":0,"t":0,"source":"scripted","seed":17,
//    "state":{"ee":[x,y],"entities":[[x,y,theta]],"target":[x,y]},
//    "action":[dx,dy],"reward":0.41}
//
// Records of an episode are contiguous and ordered by t. An "aborted":true
// field appears only on aborted episodes.

#ifndef BCOOD_HARNESS_DATASET_IO_H_
#define BCOOD_HARNESS_DATASET_IO_H_

#include <cstdint>
#include <stdexcept>
#include <string>

#include "bcood/pusht_sim.h"
#include "bcood/world.h"

namespace bcood::harness {

inline constexpr int kDatasetVersion = 1;

class DatasetFormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct DatasetFile {
  Dataset dataset;
  std::string sim_config_hash;
  TGeometry t_geometry;
};

std::string serialize_dataset(const Dataset& d, const SimConfig& config);
// Throws DatasetFormatError with the offending line number.
DatasetFile parse_dataset(const std::string& text);

void save_dataset(const Dataset& d, const SimConfig& config, const std::string& path);
DatasetFile load_dataset(const std::string& path);

// Content hash over the serialised steps (header excluded), hex encoded.
std::string dataset_hash(const Dataset& d);

}  // namespace bcood::harness

#endif  // BCOOD_HARNESS_DATASET_IO_H_
