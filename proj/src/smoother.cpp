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

#include "pdhmm/smoother.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace pdhmm {

namespace {

// Random streams: forward filtering uses stream 0, the backward pass 1,
// interpolation and forecasting 2.
constexpr std::uint64_t kBackwardStream = 1;
constexpr std::uint64_t kQueryStream = 2;
constexpr std::uint64_t kCombineStream = 6;

bool only_empty(const MixtureState& s) { return s.support_size() == 1 && s.components[0].partition.empty(); }

}  // namespace

std::vector<BackwardState> backward_pass(const ObservationSequence& seq, const EPParams& params,
                                         const FilterOptions& options) {
  seq.validate();
  FilterEngine engine(params, options, kBackwardStream);
  const std::size_t n = seq.size();
  std::vector<BackwardState> out(n);
  MixtureState state = MixtureState::point_mass(Partition(), seq.times[n - 1]);
  state.kind = "backward";
  for (std::size_t k = n; k-- > 0;) {
    if (k + 1 < n) {
      state = engine.predict(out[k + 1].at_observation, seq.times[k + 1] - seq.times[k]);
      state.time = seq.times[k];
      out[k + 1].propagated = state;
    }
    UpdateResult u = engine.update(state, seq.observations[k]);
    u.state.time = seq.times[k];
    out[k].index = k;
    out[k].log_predictive = u.log_predictive;
    out[k].log_evidence = u.state.log_evidence;
    out[k].at_observation = std::move(u.state);
  }
  return out;
}

MixtureState combine(const MixtureState& forward, const MixtureState& backward, const EPParams& params,
                     const PruningStrategy& pruning) {
  const MixtureState f = prune(forward, pruning);
  const MixtureState b = prune(backward, pruning);
  PsfTable table(params);
  std::vector<double> base;
  double bmax = -std::numeric_limits<double>::infinity();
  for (const auto& l : f.components)
    for (const auto& w : b.components) {
      base.push_back(std::log(l.weight) - table.log_psf(l.partition) + std::log(w.weight) - table.log_psf(w.partition));
      bmax = std::max(bmax, base.back());
    }
  CountsWeights acc;
  std::size_t idx = 0;
  for (const auto& l : f.components)
    for (const auto& w : b.components) acc.add_coag(l.partition, w.partition, std::exp(base[idx++] - bmax));
  double mx = -std::numeric_limits<double>::infinity();
  acc.for_each([&](CountsWeights::Counts mu, double& v) {
    v = std::log(v) + table.log_psf(mu);
    mx = std::max(mx, v);
  });
  if (!std::isfinite(mx)) throw std::runtime_error("forward and backward laws do not overlap");
  double total = 0.0;
  acc.for_each([&](CountsWeights::Counts, double& v) { total += v = std::exp(v - mx); });
  MixtureState out = from_weights_pruned(acc, forward.time, pruning);
  out.kind = "smoothed";
  out.log_evidence = bmax + mx + std::log(total);
  return out;
}

MixtureState combine(const MixtureState& forward, const MixtureState& backward, const EPParams& params,
                     const PruningStrategy& pruning, const PredictionMode& mode, Rng& rng) {
  const MixtureState f = prune(forward, pruning);
  const MixtureState b = prune(backward, pruning);
  bool exact = mode.kind == PredictionMode::Kind::exact || only_empty(f) || only_empty(b);
  if (!exact && mode.kind == PredictionMode::Kind::automatic) {
    double work = 0.0;
    for (const auto& l : f.components)
      for (const auto& w : b.components)
        if (work <= mode.exact_work_limit) work += coag_enumeration_size(l.partition, w.partition, mode.exact_work_limit);
    exact = work <= mode.exact_work_limit;
  }
  if (exact) return combine(f, b, params, pruning);
  PsfTable table(params);
  std::vector<JointSeating> pairs;
  std::vector<double> logw;
  for (const auto& l : f.components)
    for (const auto& w : b.components) {
      pairs.emplace_back(l.partition, w.partition, params);
      logw.push_back(std::log(l.weight) - table.log_psf(l.partition) + std::log(w.weight) -
                     table.log_psf(w.partition) + pairs.back().log_probability());
    }
  const double mx = *std::max_element(logw.begin(), logw.end());
  if (!std::isfinite(mx)) throw std::runtime_error("forward and backward laws do not overlap");
  std::vector<double> cumulative(logw.size());
  double total = 0.0;
  for (std::size_t i = 0; i < logw.size(); ++i) cumulative[i] = total += std::exp(logw[i] - mx);
  PartitionWeights acc;
  for (std::size_t m = 0; m < mode.particles; ++m)
    acc[pairs[rng.categorical_cumulative(cumulative)].sample(rng)] += 1.0;
  MixtureState out = from_weights_pruned(acc, forward.time, pruning);
  out.kind = "smoothed";
  out.log_evidence = mx + std::log(total);
  return out;
}

SmoothingResult smooth_all(const ObservationSequence& seq, const EPParams& params, const FilterOptions& options) {
  SmoothingResult r;
  r.forward = filter(seq, params, options);
  r.backward = backward_pass(seq, params, options);
  const std::size_t n = seq.size();
  Rng rng(options.seed, kCombineStream);
  for (std::size_t k = 0; k < n; ++k) {
    const MixtureState& fwd = r.forward.steps[k].updated;
    const MixtureState bwd = k + 1 == n ? MixtureState::point_mass(Partition(), fwd.time) : r.backward[k + 1].propagated;
    MixtureState s = combine(fwd, bwd, params, options.pruning, options.prediction, rng);
    s.log_evidence += fwd.log_evidence + (k + 1 < n ? r.backward[k + 1].log_evidence : 0.0);
    r.smoothed.push_back(std::move(s));
  }
  return r;
}

MixtureState smooth(const ObservationSequence& seq, std::size_t k, const EPParams& params,
                    const FilterOptions& options) {
  if (k >= seq.size()) throw std::out_of_range("smoothing index beyond the last observation");
  return smooth_all(seq, params, options).smoothed[k];
}

MixtureState interpolate(const SmoothingResult& smoothing, const ObservationSequence& seq, double t,
                         const EPParams& params, const FilterOptions& options) {
  const auto& times = seq.times;
  const std::size_t n = times.size();
  if (t > times[n - 1]) return forecast_state(smoothing.forward.steps.back().updated, t, params, options);
  for (std::size_t k = 0; k < n; ++k)
    if (t == times[k]) return smoothing.smoothed[k];
  FilterEngine engine(params, options, kQueryStream);
  MixtureState fwd, bwd;
  if (t < times[0]) {
    fwd = MixtureState::point_mass(Partition(), t);
    bwd = engine.predict(smoothing.backward[0].at_observation, times[0] - t);
  } else {
    std::size_t k = static_cast<std::size_t>(std::upper_bound(times.begin(), times.end(), t) - times.begin()) - 1;
    fwd = engine.predict(smoothing.forward.steps[k].updated, t - times[k]);
    bwd = engine.predict(smoothing.backward[k + 1].at_observation, times[k + 1] - t);
  }
  fwd.time = t;
  MixtureState out = combine(fwd, bwd, params, options.pruning, options.prediction, engine.rng());
  out.kind = "interpolated";
  out.log_evidence = smoothing.forward.log_evidence;
  return out;
}

MixtureState interpolate(const ObservationSequence& seq, double t, const EPParams& params,
                         const FilterOptions& options) {
  return interpolate(smooth_all(seq, params, options), seq, t, params, options);
}

MixtureState forecast_state(const MixtureState& last, double t, const EPParams& params, const FilterOptions& options) {
  if (t < last.time) throw std::invalid_argument("forecast time precedes the last observation");
  FilterEngine engine(params, options, kQueryStream);
  MixtureState out = engine.predict(last, t - last.time);
  out.time = t;
  out.kind = "forecast";
  return out;
}

MixtureState forecast_state(const ObservationSequence& seq, double t, const EPParams& params,
                            const FilterOptions& options) {
  return forecast_state(filter(seq, params, options).steps.back().updated, t, params, options);
}

Partition forecast_partition(const MixtureState& state, std::uint32_t m, const EPParams& params, Rng& rng) {
  std::vector<double> cumulative;
  double acc = 0.0;
  for (const auto& c : state.components) cumulative.push_back(acc += c.weight);
  const auto& lambda = state.components[rng.categorical_cumulative(cumulative)].partition;
  return crp_conditional_simulate(lambda, m, params, rng);
}

std::vector<std::pair<Partition, double>> predictive_partition_law(const MixtureState& state, std::uint32_t m,
                                                                   const EPParams& params) {
  auto out = crp_predictive_law(Partition(), m, params);
  for (auto& e : out) e.second = 0.0;
  for (const auto& c : state.components) {
    auto law = crp_predictive_law(c.partition, m, params);
    for (std::size_t i = 0; i < law.size(); ++i) out[i].second += c.weight * law[i].second;
  }
  return out;
}

}  // namespace pdhmm
