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
#include <vector>

#include "pdhmm/dual_process.hpp"
#include "pdhmm/ewens_pitman.hpp"
#include "pdhmm/filter.hpp"
#include "pdhmm/pd_simplex.hpp"
#include "pdhmm/rng.hpp"

namespace pdhmm {

struct BpfOptions {
  std::size_t particles = 10000;
  double epsilon = 0.005;
  // Resample when ess drops below this fraction of the particle count.
  double resample_threshold = 0.5;
  std::uint64_t seed = 1;
  // Keep every particle of every step (the last step is always kept).
  bool keep_particles = false;
  EntranceOptions entrance;
};

// Simulates the latent diffusion over a gap by the block-count hierarchy:
// N ~ d(delta), a paintbox partition of N draws from x, then the conditional
// PD law given that partition. N in {0, 1} gives a fresh PD draw.
class TransitionSampler {
 public:
  TransitionSampler(const EPParams& params, double epsilon, const EntranceOptions& entrance = {});

  FrequencyVector operator()(const FrequencyVector& x, double delta, Rng& rng);
  std::uint32_t sample_block_count(double delta, Rng& rng);

 private:
  EPParams params_;
  double epsilon_;
  EntranceOptions entrance_;
  std::map<double, std::vector<double>> cumulative_;
};

FrequencyVector transition_simulate(const FrequencyVector& x, double delta, const EPParams& params, double epsilon,
                                    Rng& rng);

struct ParticleEnsemble {
  double time = 0.0;
  std::vector<FrequencyVector> particles;
  std::vector<double> log_weights;  // unnormalized, before any resampling at this step
  double ess = 0.0;

  std::vector<double> normalized_weights() const;
};

struct BpfStep {
  ParticleEnsemble ensemble;
  double log_predictive = 0.0;  // log of the mean particle likelihood
  bool resampled = false;
};

struct BpfResult {
  std::vector<BpfStep> steps;
  double log_evidence = 0.0;
};

class WeightDegeneracy : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// m indices drawn with replacement in proportion to the normalized weights.
std::vector<std::size_t> multinomial_resample(const std::vector<double>& weights, std::size_t m, Rng& rng);

BpfResult bpf_filter(const ObservationSequence& seq, const EPParams& params, const BpfOptions& options);

}  // namespace pdhmm
