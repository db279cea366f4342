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
#include <span>
#include <utility>
#include <vector>

#include "pdhmm/partition.hpp"
#include "pdhmm/rng.hpp"

namespace pdhmm {

struct EPParams {
  double alpha = 0.0;
  double theta = 1.0;

  // Requires alpha in [0, 1) and theta > -alpha.
  void validate() const;
};

double psf(const Partition& p, const EPParams& params);
double log_psf(const Partition& p, const EPParams& params);

// Cached log-PSF evaluation for repeated calls with one parameter pair.
class PsfTable {
 public:
  explicit PsfTable(const EPParams& params);
  const EPParams& params() const { return params_; }
  // Grows the tables to cover partitions of size up to n.
  void reserve(std::uint32_t n);
  double log_psf(const Partition& p);
  // Same, for a partition given by part multiplicities (counts[v] parts of size v).
  double log_psf(std::span<const std::uint32_t> counts);
  // log prod_{i=1}^{k-1} (theta + i alpha)
  double log_new_tables(std::size_t k);
  // log (theta + 1)_(n-1)
  double log_rising(std::uint32_t n);
  // log (1 - alpha)_(b)
  double log_block(std::uint32_t b);

 private:
  EPParams params_;
  std::vector<double> log_new_tables_;   // sum_{i=1}^{k-1} log(theta + i alpha)
  std::vector<double> log_rising_;       // log (theta + 1)_(n-1)
  std::vector<double> log_block_;        // log (1 - alpha)_(b)
};

Partition crp_simulate(std::uint32_t n, const EPParams& params, Rng& rng);

// Probability that the next |gamma| customers form gamma given that the
// first |omega| formed omega.
double crp_conditional(const Partition& omega, const Partition& gamma, const EPParams& params);
double log_crp_conditional(const Partition& omega, const Partition& gamma, const EPParams& params);

// Law of the full partition given omega then gamma, canonical order.
std::vector<std::pair<Partition, double>> coag_kernel(const Partition& omega, const Partition& gamma,
                                                      const EPParams& params);

// Joint law of the partitions formed by the first |omega| and the next
// |gamma| customers, summed over the coagulation set: the total is
// Pr(Pi_{1:n} = omega, Pi_{n+1:n+m} = gamma) = sum_mu H(omega, gamma | mu) psf(mu).
// A recursion over the parts of omega keeps only the remaining multiplicities
// of gamma's part sizes, so the coagulation set is never listed.
class JointSeating {
 public:
  JointSeating(const Partition& omega, const Partition& gamma, const EPParams& params);

  double log_probability() const { return log_total_; }
  // One mu with probability H(omega, gamma | mu) psf(mu) / total.
  Partition sample(Rng& rng) const;
  // Number of recursion states visited, a cost measure.
  double work() const { return work_; }

 private:
  std::vector<Part> rows_;
  std::vector<SizeClass> cols_;
  std::vector<std::size_t> radix_;
  std::vector<std::vector<double>> pair_;    // log weight of row i joined to column class j
  std::vector<std::vector<double>> layers_;  // log sums after each row, indexed by state
  std::vector<double> final_;                // layers_.back() with the new-table factor applied
  double log_total_ = 0.0;
  double work_ = 0.0;
};

// Seats m further customers after lambda; returns the partition they form.
Partition crp_conditional_simulate(const Partition& lambda, std::uint32_t m, const EPParams& params, Rng& rng);

// Law of the partition of m new customers after lambda, over all of P_m.
std::vector<std::pair<Partition, double>> crp_predictive_law(const Partition& lambda, std::uint32_t m,
                                                             const EPParams& params);

}  // namespace pdhmm
