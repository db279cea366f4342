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

#include "pdhmm/bpf.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace pdhmm {

TransitionSampler::TransitionSampler(const EPParams& params, double epsilon, const EntranceOptions& entrance)
    : params_(params), epsilon_(epsilon), entrance_(entrance) {
  params_.validate();
}

std::uint32_t TransitionSampler::sample_block_count(double delta, Rng& rng) {
  auto it = cumulative_.find(delta);
  if (it == cumulative_.end()) {
    auto law = death_entrance_distribution(delta, params_.theta, entrance_);
    std::partial_sum(law.begin(), law.end(), law.begin());
    it = cumulative_.emplace(delta, std::move(law)).first;
  }
  return static_cast<std::uint32_t>(rng.categorical_cumulative(it->second));
}

FrequencyVector TransitionSampler::operator()(const FrequencyVector& x, double delta, Rng& rng) {
  const std::uint32_t n = sample_block_count(delta, rng);
  if (n <= 1) return sample_pd(params_, epsilon_, rng);
  return sample_pd_conditional(paintbox_sample(x, n, rng), params_, epsilon_, rng);
}

FrequencyVector transition_simulate(const FrequencyVector& x, double delta, const EPParams& params, double epsilon,
                                    Rng& rng) {
  TransitionSampler sampler(params, epsilon);
  return sampler(x, delta, rng);
}

std::vector<double> ParticleEnsemble::normalized_weights() const {
  std::vector<double> w(log_weights.size());
  const double mx = *std::max_element(log_weights.begin(), log_weights.end());
  double s = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) s += w[i] = std::exp(log_weights[i] - mx);
  for (double& v : w) v /= s;
  return w;
}

namespace {

double weigh(ParticleEnsemble& e, const Partition& pi) {
  // Returns log of the mean weight; fills ess.
  for (std::size_t i = 0; i < e.particles.size(); ++i) e.log_weights[i] += log_likelihood(pi, e.particles[i]);
  const double mx = *std::max_element(e.log_weights.begin(), e.log_weights.end());
  if (!std::isfinite(mx)) {
    std::ostringstream msg;
    msg << "all " << e.particles.size() << " particles have zero likelihood for " << pi.to_string() << " at t="
        << e.time;
    throw WeightDegeneracy(msg.str());
  }
  double s = 0.0, s2 = 0.0;
  for (double lw : e.log_weights) {
    double w = std::exp(lw - mx);
    s += w;
    s2 += w * w;
  }
  e.ess = s * s / s2;
  return mx + std::log(s);
}

}  // namespace

std::vector<std::size_t> multinomial_resample(const std::vector<double>& weights, std::size_t m, Rng& rng) {
  std::vector<double> cumulative(weights.size());
  std::partial_sum(weights.begin(), weights.end(), cumulative.begin());
  std::vector<std::size_t> idx(m);
  for (auto& i : idx) i = rng.categorical_cumulative(cumulative);
  return idx;
}

BpfResult bpf_filter(const ObservationSequence& seq, const EPParams& params, const BpfOptions& options) {
  seq.validate();
  if (options.particles < 2) throw std::invalid_argument("particle filter needs at least two particles");
  const std::size_t m = options.particles;
  Rng rng(options.seed, 3);
  TransitionSampler move(params, options.epsilon, options.entrance);
  BpfResult result;
  ParticleEnsemble current;
  current.time = seq.times[0];
  current.particles.reserve(m);
  for (std::size_t i = 0; i < m; ++i) current.particles.push_back(sample_pd(params, options.epsilon, rng));
  // Log weights carried between steps; zero after resampling.
  std::vector<double> carried(m, 0.0);
  const double log_m = std::log(static_cast<double>(m));
  double carried_log_sum = log_m;
  for (std::size_t k = 0; k < seq.size(); ++k) {
    if (k > 0) {
      const double delta = seq.times[k] - seq.times[k - 1];
      for (auto& x : current.particles) x = move(x, delta, rng);
      current.time = seq.times[k];
    }
    current.log_weights = carried;
    const double log_sum = weigh(current, seq.observations[k]);
    BpfStep step;
    step.log_predictive = log_sum - carried_log_sum;
    result.log_evidence += step.log_predictive;
    const bool resample = current.ess < options.resample_threshold * static_cast<double>(m);
    step.resampled = resample;
    const bool keep = options.keep_particles || k + 1 == seq.size();
    if (keep) {
      step.ensemble = current;
    } else {
      step.ensemble.time = current.time;
      step.ensemble.ess = current.ess;
    }
    if (resample) {
      std::vector<FrequencyVector> next;
      next.reserve(m);
      for (std::size_t i : multinomial_resample(current.normalized_weights(), m, rng)) next.push_back(current.particles[i]);
      current.particles = std::move(next);
      std::fill(carried.begin(), carried.end(), 0.0);
      carried_log_sum = log_m;
    } else {
      carried = current.log_weights;
      carried_log_sum = log_sum;
    }
    result.steps.push_back(std::move(step));
  }
  return result;
}

}  // namespace pdhmm
