// Copyright 2026 The pdhmm Authors
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

#pragma once

#include <istream>
#include <optional>
#include <string>
#include <vector>

#include "pdhmm/filter.hpp"

namespace pdhmm {

struct Edge {
  double timestamp;
  std::string a, b;
};

// Rows "timestamp,node_a,node_b" separated by commas, tabs or spaces. A first
// row whose timestamp is not numeric is taken as a header.
std::vector<Edge> read_edge_list(std::istream& in);

struct IngestOptions {
  double window = 1800.0;  // seconds per window
  std::optional<double> origin;  // start of window 0; defaults to the earliest kept timestamp
  double time_unit = 1.0;  // diffusion time per window
  bool include_singletons = false;
  bool keep_empty = true;
  // When non-empty, only edges whose day index floor(timestamp / day_length) is listed are kept.
  std::vector<long> days;
  double day_length = 86400.0;
};

struct IngestResult {
  ObservationSequence sequence;
  std::vector<long> windows;  // window index of each observation
  std::vector<std::string> warnings;
};

// Connected-component sizes of the undirected graph of each window. Times are
// window midpoints in units of time_unit per window, measured from the origin.
IngestResult ingest_graph(const std::vector<Edge>& edges, const IngestOptions& options);

// Component sizes of a single edge set, over `universe` extra isolated nodes if given.
Partition component_partition(const std::vector<Edge>& edges, const std::vector<std::string>* universe = nullptr);

}  // namespace pdhmm
