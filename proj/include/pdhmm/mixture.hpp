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

#include <string>
#include <unordered_map>
#include <vector>

#include "pdhmm/partition.hpp"

namespace pdhmm {

struct Component {
  Partition partition;
  double weight;
};

// Finite mixture of conditional PD laws indexed by partitions.
struct MixtureState {
  std::vector<Component> components;  // canonical partition order, positive weights
  double time = 0.0;
  double log_evidence = 0.0;
  std::string kind = "filtered";

  static MixtureState point_mass(const Partition& p, double time = 0.0);
  static MixtureState from_weights(PartitionWeights weights, double time,
                                   double floor = 0.0);

  std::size_t support_size() const { return components.size(); }
  double total_weight() const;
  double weight_of(const Partition& p) const;
  // Drops weights at or below floor, renormalizes and restores canonical order.
  void normalize(double floor = 0.0);
};

struct PruningStrategy {
  enum class Kind { none, top_k, mass_threshold };
  Kind kind = Kind::none;
  std::size_t k = 10;
  double mass = 0.9;

  static PruningStrategy none() { return {}; }
  static PruningStrategy top(std::size_t k) { return {Kind::top_k, k, 0.9}; }
  static PruningStrategy mass_fraction(double rho) { return {Kind::mass_threshold, 10, rho}; }
  // Parses "none", "top:K" or "mass:RHO".
  static PruningStrategy parse(const std::string& text);
  std::string to_string() const;
};

// Heaviest components first, ties broken by canonical partition order.
MixtureState prune(const MixtureState& state, const PruningStrategy& strategy);
// from_weights followed by prune, copying only the kept partitions.
MixtureState from_weights_pruned(const PartitionWeights& weights, double time, const PruningStrategy& strategy,
                                 double floor = 0.0);
MixtureState from_weights_pruned(CountsWeights& weights, double time, const PruningStrategy& strategy,
                                 double floor = 0.0);

double total_variation(const MixtureState& a, const MixtureState& b);

}  // namespace pdhmm
