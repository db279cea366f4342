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

#include "pdhmm/ingest.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

namespace pdhmm {

namespace {

std::vector<std::string> fields(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',' || c == '\t' || c == ' ' || c == ';') {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

bool parse_number(const std::string& s, double& v) {
  std::size_t used = 0;
  try {
    v = std::stod(s, &used);
  } catch (const std::logic_error&) {
    return false;
  }
  return used == s.size();
}

class UnionFind {
 public:
  std::size_t add() {
    parent_.push_back(parent_.size());
    size_.push_back(1);
    return parent_.size() - 1;
  }
  std::size_t find(std::size_t x) {
    while (parent_[x] != x) x = parent_[x] = parent_[parent_[x]];
    return x;
  }
  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (size_[a] < size_[b]) std::swap(a, b);
    parent_[b] = a;
    size_[a] += size_[b];
  }
  std::size_t size_of(std::size_t x) { return size_[find(x)]; }
  std::size_t count() const { return parent_.size(); }

 private:
  std::vector<std::size_t> parent_, size_;
};

}  // namespace

std::vector<Edge> read_edge_list(std::istream& in) {
  std::vector<Edge> edges;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto f = fields(line);
    if (f.empty() || f[0][0] == '#') continue;
    double ts;
    if (!parse_number(f[0], ts)) {
      if (edges.empty() && lineno == 1) continue;
      throw std::invalid_argument("edge list line " + std::to_string(lineno) + ": timestamp is not numeric");
    }
    if (f.size() < 3) throw std::invalid_argument("edge list line " + std::to_string(lineno) + ": expected three fields");
    edges.push_back({ts, f[1], f[2]});
  }
  return edges;
}

Partition component_partition(const std::vector<Edge>& edges, const std::vector<std::string>* universe) {
  UnionFind uf;
  std::unordered_map<std::string, std::size_t> id;
  auto node = [&](const std::string& name) {
    auto it = id.find(name);
    if (it != id.end()) return it->second;
    return id[name] = uf.add();
  };
  if (universe)
    for (const auto& n : *universe) node(n);
  for (const auto& e : edges) uf.unite(node(e.a), node(e.b));
  std::vector<Part> sizes;
  for (std::size_t i = 0; i < uf.count(); ++i)
    if (uf.find(i) == i) {
      std::size_t s = uf.size_of(i);
      // A self-loop alone does not make an interaction.
      if (s > 1 || universe) sizes.push_back(static_cast<Part>(s));
    }
  return Partition(sizes);
}

IngestResult ingest_graph(const std::vector<Edge>& input, const IngestOptions& options) {
  if (!(options.window > 0.0)) throw std::invalid_argument("window length must be positive");
  if (!(options.time_unit > 0.0)) throw std::invalid_argument("time unit must be positive");
  std::set<long> days(options.days.begin(), options.days.end());
  std::vector<Edge> edges;
  for (const auto& e : input)
    if (days.empty() || days.count(static_cast<long>(std::floor(e.timestamp / options.day_length)))) edges.push_back(e);
  IngestResult result;
  if (edges.empty()) throw std::invalid_argument("no edges left after the day filter");
  double origin = options.origin.value_or(
      std::min_element(edges.begin(), edges.end(), [](auto& x, auto& y) { return x.timestamp < y.timestamp; })
          ->timestamp);
  std::map<long, std::vector<Edge>> buckets;
  for (const auto& e : edges) {
    if (e.timestamp < origin) continue;
    buckets[static_cast<long>(std::floor((e.timestamp - origin) / options.window))].push_back(e);
  }
  if (buckets.empty()) throw std::invalid_argument("every edge precedes the origin");
  std::vector<std::string> universe;
  if (options.include_singletons) {
    std::set<std::string> names;
    for (const auto& e : edges) {
      names.insert(e.a);
      names.insert(e.b);
    }
    universe.assign(names.begin(), names.end());
  }
  const long first = buckets.begin()->first, last = buckets.rbegin()->first;
  static const std::vector<Edge> none;
  for (long w = first; w <= last; ++w) {
    auto it = buckets.find(w);
    const auto& bucket = it == buckets.end() ? none : it->second;
    Partition p = component_partition(bucket, options.include_singletons ? &universe : nullptr);
    if (bucket.empty()) {
      result.warnings.push_back("window " + std::to_string(w) + " has no edges" +
                                (options.keep_empty ? "; kept as an empty observation" : "; dropped"));
      if (!options.keep_empty) continue;
    }
    result.windows.push_back(w);
    result.sequence.times.push_back((static_cast<double>(w) + 0.5) * options.time_unit);
    result.sequence.observations.push_back(p);
  }
  return result;
}

}  // namespace pdhmm
