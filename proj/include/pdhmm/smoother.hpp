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
#include <utility>
#include <vector>

#include "pdhmm/filter.hpp"

namespace pdhmm {

// Information from observations k..N, produced by filtering the reversed
// sequence under the stationary prior.
struct BackwardState {
  std::size_t index = 0;
  MixtureState at_observation;  // after absorbing pi^k, located at t_k
  MixtureState propagated;      // at_observation moved back to t_{k-1}; empty for k = 0
  double log_predictive = 0.0;  // log Pr(pi^k | pi^{k+1:N})
  double log_evidence = 0.0;    // log Pr(pi^{k:N})
};

// One entry per observation index, in increasing k.
std::vector<BackwardState> backward_pass(const ObservationSequence& seq, const EPParams& params,
                                         const FilterOptions& options);

// Mixes a forward law (v) with backward information (h): the weight of mu is
// proportional to sum v_l h_w H(l, w | mu) psf(mu) / (psf(l) psf(w)).
// The result's log_evidence holds the log of that normalizing sum.
MixtureState combine(const MixtureState& forward, const MixtureState& backward, const EPParams& params,
                     const PruningStrategy& pruning = {});
// Same law under a prediction mode. Monte Carlo draws (lambda, w) pairs by
// their exact joint-seating weight and then mu from Coag(lambda, w), so the
// normalizer stays exact and only the weights over mu are empirical.
// Automatic mode enumerates while the summed coag_enumeration_size stays
// below mode.exact_work_limit.
MixtureState combine(const MixtureState& forward, const MixtureState& backward, const EPParams& params,
                     const PruningStrategy& pruning, const PredictionMode& mode, Rng& rng);

struct SmoothingResult {
  FilterResult forward;
  std::vector<BackwardState> backward;
  std::vector<MixtureState> smoothed;  // log_evidence holds log Pr(pi^{0:N}) recovered at k
};

SmoothingResult smooth_all(const ObservationSequence& seq, const EPParams& params, const FilterOptions& options);
MixtureState smooth(const ObservationSequence& seq, std::size_t k, const EPParams& params,
                    const FilterOptions& options);

// Posterior at an arbitrary time given all observations.
MixtureState interpolate(const ObservationSequence& seq, double t, const EPParams& params,
                         const FilterOptions& options);
MixtureState interpolate(const SmoothingResult& smoothing, const ObservationSequence& seq, double t,
                         const EPParams& params, const FilterOptions& options);

// Filtering law at t_N propagated to a time t >= t_N.
MixtureState forecast_state(const ObservationSequence& seq, double t, const EPParams& params,
                            const FilterOptions& options);
MixtureState forecast_state(const MixtureState& last, double t, const EPParams& params, const FilterOptions& options);

// One draw of the partition of m future samples from the mixture.
Partition forecast_partition(const MixtureState& state, std::uint32_t m, const EPParams& params, Rng& rng);
// Exact law of the partition of m future samples, over all of P_m.
std::vector<std::pair<Partition, double>> predictive_partition_law(const MixtureState& state, std::uint32_t m,
                                                                   const EPParams& params);

}  // namespace pdhmm
