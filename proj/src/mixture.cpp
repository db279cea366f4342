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

#include "pdhmm/mixture.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace pdhmm {

MixtureState MixtureState::point_mass(const Partition& p, double time) {
  MixtureState s;
  s.components.push_back({p, 1.0});
  s.time = time;
  return s;
}

MixtureState MixtureState::from_weights(PartitionWeights weights, double time,
                                        double floor) {
  MixtureState s;
  s.time = time;
  s.components.reserve(weights.size());
  for (auto& [p, w] : weights) s.components.push_back({p, w});
  s.normalize(floor);
  return s;
}

double MixtureState::total_weight() const {
  double t = 0.0;
  for (const auto& c : components) t += c.weight;
  return t;
}

double MixtureState::weight_of(const Partition& p) const {
  auto it = std::lower_bound(components.begin(), components.end(), p,
                             [](const Component& c, const Partition& q) { return c.partition < q; });
  return it != components.end() && it->partition == p ? it->weight : 0.0;
}

void MixtureState::normalize(double floor) {
  double total = total_weight();
  if (!(total > 0.0) || !std::isfinite(total)) throw std::runtime_error("mixture has no positive finite mass");
  std::erase_if(components, [&](const Component& c) { return !(c.weight / total > floor); });
  total = total_weight();
  for (auto& c : components) c.weight /= total;
  std::sort(components.begin(), components.end(),
            [](const Component& a, const Component& b) { return a.partition < b.partition; });
}

PruningStrategy PruningStrategy::parse(const std::string& text) {
  if (text == "none" || text == "full") return none();
  auto colon = text.find(':');
  if (colon == std::string::npos) throw std::invalid_argument("pruning must be none, top:K or mass:RHO");
  std::string head = text.substr(0, colon), tail = text.substr(colon + 1);
  if (head == "top") {
    long k = std::stol(tail);
    if (k < 1) throw std::invalid_argument("top-k pruning needs k >= 1");
    return top(static_cast<std::size_t>(k));
  }
  if (head == "mass") {
    double rho = std::stod(tail);
    if (!(rho > 0.0 && rho <= 1.0)) throw std::invalid_argument("mass pruning needs rho in (0, 1]");
    return mass_fraction(rho);
  }
  throw std::invalid_argument("unknown pruning strategy: " + text);
}

std::string PruningStrategy::to_string() const {
  switch (kind) {
    case Kind::top_k:
      return "top:" + std::to_string(k);
    case Kind::mass_threshold:
      return "mass:" + std::to_string(mass);
    default:
      return "none";
  }
}

namespace {

template <class Key>
struct Entry {
  Key key;
  double weight;
};

bool key_less(const Partition* a, const Partition* b) { return *a < *b; }
bool key_less(CountsWeights::Counts a, CountsWeights::Counts b) {
  return CountsWeights::partition(a) < CountsWeights::partition(b);
}

const Partition& to_partition(const Partition* p) { return *p; }
Partition to_partition(CountsWeights::Counts c) { return CountsWeights::partition(c); }

template <class Key>
bool heavier(const Entry<Key>& a, const Entry<Key>& b) {
  if (a.weight != b.weight) return a.weight > b.weight;
  return key_less(a.key, b.key);
}

// Number of leading entries kept; reorders entries so these come first.
template <class Key>
std::size_t select(std::vector<Entry<Key>>& entries, const PruningStrategy& strategy) {
  if (strategy.kind == PruningStrategy::Kind::none) return entries.size();
  if (strategy.kind == PruningStrategy::Kind::top_k) {
    std::size_t keep = std::min(entries.size(), strategy.k);
    std::partial_sort(entries.begin(), entries.begin() + keep, entries.end(), heavier<Key>);
    return keep;
  }
  std::sort(entries.begin(), entries.end(), heavier<Key>);
  double total = 0.0, acc = 0.0;
  for (const auto& e : entries) total += e.weight;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    acc += entries[i].weight;
    if (acc >= strategy.mass * total) return i + 1;
  }
  return entries.size();
}

template <class Key>
MixtureState build(std::vector<Entry<Key>>& entries, double time, const PruningStrategy& strategy) {
  const std::size_t keep = select(entries, strategy);
  MixtureState out;
  out.time = time;
  out.components.reserve(keep);
  for (std::size_t i = 0; i < keep; ++i) out.components.push_back({to_partition(entries[i].key), entries[i].weight});
  out.normalize();
  return out;
}

template <class Map>
double positive_total(Map& weights) {
  double total = 0.0;
  weights.for_each([&](auto, double w) { total += w; });
  if (!(total > 0.0) || !std::isfinite(total)) throw std::runtime_error("mixture has no positive finite mass");
  return total;
}

struct WeightsView {
  const PartitionWeights& w;
  std::size_t size() const { return w.size(); }
  template <class F>
  void for_each(F&& f) const {
    for (const auto& [p, v] : w) f(&p, v);
  }
};

template <class Map, class Key>
MixtureState pruned(Map&& weights, double time, const PruningStrategy& strategy, double floor) {
  const double total = positive_total(weights);
  std::vector<Entry<Key>> entries;
  entries.reserve(weights.size());
  weights.for_each([&](Key k, double w) {
    if (w / total > floor) entries.push_back({k, w});
  });
  return build(entries, time, strategy);
}

}  // namespace

MixtureState prune(const MixtureState& state, const PruningStrategy& strategy) {
  if (strategy.kind == PruningStrategy::Kind::none) return state;
  std::vector<Entry<const Partition*>> entries;
  entries.reserve(state.components.size());
  for (const auto& c : state.components) entries.push_back({&c.partition, c.weight});
  MixtureState out = build(entries, state.time, strategy);
  out.log_evidence = state.log_evidence;
  out.kind = state.kind;
  return out;
}

MixtureState from_weights_pruned(const PartitionWeights& weights, double time, const PruningStrategy& strategy,
                                 double floor) {
  return pruned<WeightsView, const Partition*>(WeightsView{weights}, time, strategy, floor);
}

MixtureState from_weights_pruned(CountsWeights& weights, double time, const PruningStrategy& strategy,
                                 double floor) {
  return pruned<CountsWeights&, CountsWeights::Counts>(weights, time, strategy, floor);
}

double total_variation(const MixtureState& a, const MixtureState& b) {
  double tv = 0.0;
  std::size_t i = 0, j = 0;
  const auto& x = a.components;
  const auto& y = b.components;
  while (i < x.size() || j < y.size()) {
    if (j == y.size() || (i < x.size() && x[i].partition < y[j].partition)) {
      tv += x[i++].weight;
    } else if (i == x.size() || y[j].partition < x[i].partition) {
      tv += y[j++].weight;
    } else {
      tv += std::abs(x[i++].weight - y[j++].weight);
    }
  }
  return 0.5 * tv;
}

}  // namespace pdhmm
