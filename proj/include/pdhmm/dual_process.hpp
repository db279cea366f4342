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

#include <cstdint>
#include <map>
#include <stdexcept>
#include <unordered_map>
#include <utility>
#include <vector>

#include "pdhmm/mixture.hpp"
#include "pdhmm/partition.hpp"
#include "pdhmm/rng.hpp"

namespace pdhmm {

class NumericalInstability : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Death rate of the block-counting chain in state k. When theta <= 0 the
// rate out of state 1 is zero, so that state is absorbing.
double death_rate(std::uint32_t k, double theta);

struct EntranceOptions {
  double tolerance = 1e-12;
  // Times below this are refused unless allow_small_time is set.
  double min_time = 1e-3;
  // Permits high-precision evaluation below min_time (cost grows like 1/t^2).
  bool allow_small_time = false;
};

// Law of the block count at time t for the chain started from infinity:
// element n is d_n(t). The vector stops once the remaining tail is below tolerance.
// Double precision is used when the alternating series is well conditioned,
// otherwise it is evaluated with MPFR at a precision chosen from the term sizes.
std::vector<double> death_entrance_distribution(double t, double theta, const EntranceOptions& options = {});
double death_entrance_prob(std::uint32_t n, double t, double theta, const EntranceOptions& options = {});

// Row of the block-count chain started at l: element n is d_{l,n}(t).
std::vector<double> death_finite_row(std::uint32_t l, double t, double theta);
double death_finite_prob(std::uint32_t l, std::uint32_t n, double t, double theta);

double dual_transition(const Partition& lambda, const Partition& omega, double t, double theta);
std::vector<std::pair<Partition, double>> dual_transition_row(const Partition& lambda, double t, double theta);

// One path of the partition-valued death process over [0, t].
Partition gillespie_propagate(const Partition& lambda, double t, double theta, Rng& rng);

// Block sizes of a uniform sample of m squares of lambda, without replacement.
Partition sample_sub_partition(const Partition& lambda, std::uint32_t m, Rng& rng);

struct PropagationMode {
  enum class Kind { exact, monte_carlo };
  Kind kind = Kind::exact;
  std::size_t particles = 10000;

  static PropagationMode exact() { return {}; }
  static PropagationMode monte_carlo(std::size_t m) { return {Kind::monte_carlo, m}; }
};

// Weights below this fraction are dropped after propagation.
inline constexpr double kPropagationFloor = 1e-15;

// Dual process for fixed theta with cached block-count rows and subsample laws.
class DualProcess {
 public:
  explicit DualProcess(double theta);
  double theta() const { return theta_; }

  const std::vector<double>& finite_row(std::uint32_t l, double t);
  struct SubsampleEntry {
    std::vector<std::uint32_t> counts;  // part multiplicities of omega
    std::uint32_t size;
    double probability;                 // H(omega | lambda)
  };
  // Subsample law of lambda in no particular order.
  const std::vector<SubsampleEntry>& sub_partitions(const Partition& lambda);

  // Results are pruned with the given strategy after the floor is applied.
  MixtureState propagate_exact(const MixtureState& state, double t, const PruningStrategy& pruning = {});
  // Each particle draws the surviving block count from the exact row, then a
  // uniform subsample of that size, which has the law of a Gillespie path.
  MixtureState propagate_monte_carlo(const MixtureState& state, double t, std::size_t particles, Rng& rng,
                                     const PruningStrategy& pruning = {});
  MixtureState propagate(const MixtureState& state, double t, const PropagationMode& mode, Rng& rng,
                         const PruningStrategy& pruning = {});

 private:
  double theta_;
  std::map<std::pair<std::uint32_t, double>, std::vector<double>> rows_;
  std::unordered_map<Partition, std::vector<SubsampleEntry>, PartitionHash> subs_;
};

MixtureState propagate_mixture(const MixtureState& state, double t, double theta, const PropagationMode& mode,
                               Rng& rng);

}  // namespace pdhmm
