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
#include <vector>

#include "pdhmm/ewens_pitman.hpp"
#include "pdhmm/partition.hpp"
#include "pdhmm/rng.hpp"

namespace pdhmm {

// Truncated point of the Kingman simplex: non-increasing atoms plus the
// mass discarded by truncation.
struct FrequencyVector {
  std::vector<double> atoms;
  double tail = 0.0;

  double atom_mass() const;
  // Atoms rescaled to sum to one.
  std::vector<double> normalized() const;
};

FrequencyVector sample_pd(const EPParams& params, double epsilon, Rng& rng);

// Draw from the PD law conditioned on having seen the partition pi.
FrequencyVector sample_pd_conditional(const Partition& pi, const EPParams& params, double epsilon, Rng& rng);

// Block sizes of n i.i.d. draws from the normalized atoms.
Partition paintbox_sample(const FrequencyVector& x, std::uint32_t n, Rng& rng);

// P(pi | x) over the normalized atoms, via a generating-function recursion
// over atoms whose terms are all non-negative.
double likelihood(const Partition& pi, const FrequencyVector& x);
double log_likelihood(const Partition& pi, const FrequencyVector& x);
double log_likelihood(const Partition& pi, const std::vector<double>& normalized_atoms);

// Same quantity through power sums and inclusion-exclusion over set partitions
// of the parts. Exponential in the number of parts; intended for checking.
double likelihood_power_sum(const Partition& pi, const FrequencyVector& x);

double power_sum(const FrequencyVector& x, unsigned k);
// 1 - sum of squared normalized atoms.
double heterozygosity(const FrequencyVector& x);
double empirical_heterozygosity(const Partition& pi);

}  // namespace pdhmm
