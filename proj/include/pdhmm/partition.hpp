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

#include <compare>
#include <cstdint>
#include <functional>
#include <algorithm>
#include <initializer_list>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include <gmpxx.h>

namespace pdhmm {

using Part = std::uint32_t;

// Integer partition stored as a non-increasing sequence of positive parts.
class Partition {
 public:
  Partition() = default;
  Partition(std::initializer_list<Part> parts);
  explicit Partition(std::vector<Part> parts);

  // Caller guarantees the parts are positive and non-increasing.
  static Partition from_sorted(std::vector<Part> parts);

  const std::vector<Part>& parts() const noexcept { return parts_; }
  std::uint32_t size() const noexcept { return size_; }
  std::size_t length() const noexcept { return parts_.size(); }
  bool empty() const noexcept { return parts_.empty(); }
  Part operator[](std::size_t i) const { return parts_[i]; }
  auto begin() const noexcept { return parts_.begin(); }
  auto end() const noexcept { return parts_.end(); }

  std::string to_string() const;
  static Partition parse(std::string_view text);

  friend bool operator==(const Partition& a, const Partition& b) noexcept {
    return a.parts_ == b.parts_;
  }
  // Canonical order: by size, then lexicographically on the parts.
  friend std::strong_ordering operator<=>(const Partition& a, const Partition& b) noexcept;

 private:
  std::vector<Part> parts_;
  std::uint32_t size_ = 0;
};

// Hash and equality also accept a non-increasing part list, so lookups need
// not build a Partition.
struct PartitionHash {
  using is_transparent = void;
  std::size_t operator()(std::span<const Part> parts) const noexcept;
  std::size_t operator()(const Partition& p) const noexcept { return (*this)(std::span<const Part>(p.parts())); }
};

struct PartitionEqual {
  using is_transparent = void;
  static std::span<const Part> view(const Partition& p) noexcept { return p.parts(); }
  static std::span<const Part> view(std::span<const Part> s) noexcept { return s; }
  template <class A, class B>
  bool operator()(const A& a, const B& b) const noexcept {
    auto x = view(a), y = view(b);
    return std::equal(x.begin(), x.end(), y.begin(), y.end());
  }
};

using PartitionWeights = std::unordered_map<Partition, double, PartitionHash, PartitionEqual>;

std::ostream& operator<<(std::ostream& os, const Partition& p);

// Distinct part value with its multiplicity, values in decreasing order.
struct SizeClass {
  Part value;
  std::uint32_t count;
};

std::vector<SizeClass> size_classes(const Partition& p);
std::map<Part, std::uint32_t> multiplicities(const Partition& p);

// All partitions of n in canonical order.
std::vector<Partition> enumerate_partitions(std::uint32_t n);

// Number of set partitions of [n] with block sizes given by p.
mpz_class combinatorial_coefficient(const Partition& p);
double log_combinatorial_coefficient(const Partition& p);

// Young diagram containment: lower fits inside upper.
bool precedes(const Partition& lower, const Partition& upper);

std::vector<Partition> lower_set(std::span<const Partition> set);
std::vector<Partition> lower_set(const Partition& p);

// Law of the partition after deleting one square chosen uniformly.
std::vector<std::pair<Partition, double>> one_step_down(const Partition& p);

struct Coagulation {
  Partition target;
  double coefficient;
};

struct ExactCoagulation {
  Partition target;
  mpq_class coefficient;
};

struct LogCoagulation {
  Partition target;
  double log_coefficient;
};

struct CoagulationOptions {
  // Total size |omega| + |gamma| up to which coefficients are computed exactly.
  std::uint32_t exact_threshold = 64;
};

// coag(omega, gamma) with coefficients H(omega, gamma | mu), canonical order.
std::vector<Coagulation> coag_with_coefficients(const Partition& omega, const Partition& gamma,
                                                const CoagulationOptions& options = {});
std::vector<ExactCoagulation> coag_with_coefficients_exact(const Partition& omega,
                                                           const Partition& gamma);
// Log-domain coefficients in unspecified order.
std::vector<LogCoagulation> coag_log_coefficients(const Partition& omega, const Partition& gamma);
// acc[mu] += scale * H(omega, gamma | mu) over coag(omega, gamma).
void coag_accumulate(const Partition& omega, const Partition& gamma, double scale, PartitionWeights& acc);

// Weights keyed by part multiplicities, so partitions are only built for
// entries the caller keeps.
class CountsWeights {
 public:
  // counts[v] is the multiplicity of part v; counts[0] is unused. Trailing
  // zeros are ignored.
  using Counts = std::span<const std::uint32_t>;

  void add(Counts counts, double value);
  // Same with the hash supplied: the sum of hash_term(v, counts[v]) over v >= 1.
  void add(std::uint64_t hash, Counts counts, double value) { insert(hash, counts, value); }
  std::uint64_t hash_term(std::size_t v, std::uint32_t c) { return term(v, c); }
  // Adds scale * H(omega, gamma | mu) for every mu in coag(omega, gamma).
  void add_coag(const Partition& omega, const Partition& gamma, double scale);
  std::size_t size() const { return entries_.size(); }
  template <class F>
  void for_each(F&& f) {
    for (auto& e : entries_) f(view(e), e.weight);
  }
  template <class F>
  void for_each(F&& f) const {
    for (const auto& e : entries_) f(view(e), e.weight);
  }
  // f(hash, counts, weight) with the stored hash.
  template <class F>
  void for_each_hashed(F&& f) const {
    for (const auto& e : entries_) f(e.hash, view(e), e.weight);
  }
  static Partition partition(Counts counts);
  static std::uint32_t size(Counts counts);

 private:
  std::uint64_t term(std::size_t v, std::uint32_t c);
  void insert(std::uint64_t hash, Counts counts, double value);

  // Keys live in one pool; an open-addressing table of entry indices finds them.
  struct Entry {
    std::uint64_t hash;
    std::uint32_t offset, length;
    double weight;
  };
  Counts view(const Entry& e) const { return Counts(pool_.data() + e.offset, e.length); }
  void grow();

  std::vector<Entry> entries_;
  std::vector<std::uint32_t> pool_;
  std::vector<std::uint32_t> table_;  // entry index + 1, zero when free
  std::vector<std::uint64_t> salt_;
};

// Number of matching matrices between the size classes of omega and gamma,
// which bounds the work of coag_log_coefficients. Counting stops above limit.
double coag_enumeration_size(const Partition& omega, const Partition& gamma, double limit = 1e12);

// H(omega | lambda): probability that a uniform subsample of |omega| squares of lambda
// has block sizes omega.
double coag_marginal_coefficient(const Partition& omega, const Partition& lambda);
mpq_class coag_marginal_coefficient_exact(const Partition& omega, const Partition& lambda);

// Every omega below lambda paired with H(omega | lambda), canonical order.
std::vector<std::pair<Partition, double>> sub_partitions(const Partition& lambda);
// Same law keyed by partition, in no particular order.
PartitionWeights sub_partition_weights(const Partition& lambda);
CountsWeights sub_partition_counts(const Partition& lambda);

// Upper bound on the work of sub_partitions(lambda).
double sub_partition_work(const Partition& lambda);

double log_factorial(std::uint64_t n);
double log_binomial(std::uint64_t n, std::uint64_t k);
mpz_class binomial_exact(std::uint64_t n, std::uint64_t k);

}  // namespace pdhmm
