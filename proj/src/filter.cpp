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

#include "pdhmm/filter.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <thread>
#include <tuple>

namespace pdhmm {

void ObservationSequence::validate() const {
  if (times.size() != observations.size()) throw std::invalid_argument("times and observations differ in length");
  if (times.empty()) throw std::invalid_argument("observation sequence is empty");
  for (std::size_t k = 0; k < times.size(); ++k) {
    if (!std::isfinite(times[k])) throw std::invalid_argument("observation time is not finite");
    if (k > 0 && !(times[k] > times[k - 1]))
      throw std::invalid_argument("observation times must be strictly increasing");
  }
}

ObservationSequence ObservationSequence::reversed() const {
  ObservationSequence r;
  r.times.assign(times.rbegin(), times.rend());
  for (double& t : r.times) t = -t;
  r.observations.assign(observations.rbegin(), observations.rend());
  return r;
}

PredictionMode PredictionMode::parse(const std::string& text) {
  auto colon = text.find(':');
  std::string head = text.substr(0, colon);
  PredictionMode m;
  if (head == "exact") {
    m.kind = Kind::exact;
  } else if (head == "montecarlo" || head == "mc" || head == "gillespie") {
    m.kind = Kind::monte_carlo;
  } else if (head == "auto") {
    m.kind = Kind::automatic;
  } else {
    throw std::invalid_argument("unknown prediction mode: " + text);
  }
  if (colon != std::string::npos) {
    long v = std::stol(text.substr(colon + 1));
    if (v < 1) throw std::invalid_argument("particle count must be positive");
    m.particles = static_cast<std::size_t>(v);
  }
  return m;
}

std::string PredictionMode::to_string() const {
  switch (kind) {
    case Kind::exact:
      return "exact";
    case Kind::monte_carlo:
      return "montecarlo:" + std::to_string(particles);
    default:
      return "auto:" + std::to_string(particles);
  }
}

FilterEngine::FilterEngine(const EPParams& params, const FilterOptions& options, std::uint64_t stream)
    : params_(params), options_(options), dual_(params.theta), psf_(params), rng_(options.seed, stream) {
  params_.validate();
}

MixtureState FilterEngine::predict(const MixtureState& state, double delta) {
  if (!(delta >= 0.0)) throw std::invalid_argument("prediction horizon must be non-negative");
  const auto& mode = options_.prediction;
  PropagationMode pm = PropagationMode::monte_carlo(mode.particles);
  if (mode.kind == PredictionMode::Kind::exact) {
    pm = PropagationMode::exact();
  } else if (mode.kind == PredictionMode::Kind::automatic && state.support_size() <= mode.exact_support_limit) {
    double work = 0.0;
    for (const auto& c : state.components) work += sub_partition_work(c.partition);
    if (work <= mode.exact_work_limit) pm = PropagationMode::exact();
  }
  MixtureState out = dual_.propagate(state, delta, pm, rng_, options_.pruning);
  out.kind = state.kind;
  return out;
}

UpdateResult FilterEngine::update(const MixtureState& state, const Partition& pi) {
  const auto& mode = options_.prediction;
  if (mode.kind == PredictionMode::Kind::automatic) {
    double work = 0.0;
    for (const auto& c : state.components)
      if (work <= mode.exact_update_limit)
        work += coag_enumeration_size(c.partition, pi, mode.exact_update_limit - work + 1.0);
    if (work > mode.exact_update_limit) return sampled_update(state, pi);
  }
  // Weight of mu: psf(mu) sum_l v_l H(l, pi | mu) / psf(l), with the l factors
  // shifted by their maximum before accumulating.
  std::vector<double> base(state.components.size());
  double bmax = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < base.size(); ++i) {
    const auto& c = state.components[i];
    base[i] = std::log(c.weight) - psf_.log_psf(c.partition);
    bmax = std::max(bmax, base[i]);
  }
  if (!std::isfinite(bmax)) throw std::runtime_error("update produced no finite mass");
  CountsWeights acc;
  for (std::size_t i = 0; i < base.size(); ++i) acc.add_coag(state.components[i].partition, pi, std::exp(base[i] - bmax));
  double mx = -std::numeric_limits<double>::infinity();
  acc.for_each([&](CountsWeights::Counts mu, double& v) {
    v = std::log(v) + psf_.log_psf(mu);
    mx = std::max(mx, v);
  });
  if (!std::isfinite(mx)) throw std::runtime_error("update produced no finite mass");
  double total = 0.0;
  acc.for_each([&](CountsWeights::Counts, double& v) { total += v = std::exp(v - mx); });
  const double log_predictive = bmax + mx + std::log(total);
  MixtureState out = from_weights_pruned(acc, state.time, options_.pruning);
  out.kind = state.kind;
  out.log_evidence = state.log_evidence + log_predictive;
  return {std::move(out), log_predictive};
}

// Components are drawn by their exact joint-seating weight and mu from
// Coag(lambda, pi), so only the weights over mu are empirical.
UpdateResult FilterEngine::sampled_update(const MixtureState& state, const Partition& pi) {
  std::vector<JointSeating> seats;
  std::vector<double> logw;
  for (const auto& c : state.components) {
    seats.emplace_back(c.partition, pi, params_);
    logw.push_back(std::log(c.weight) - psf_.log_psf(c.partition) + seats.back().log_probability());
  }
  const double mx = *std::max_element(logw.begin(), logw.end());
  if (!std::isfinite(mx)) throw std::runtime_error("update produced no finite mass");
  std::vector<double> cumulative(logw.size());
  double total = 0.0;
  for (std::size_t i = 0; i < logw.size(); ++i) cumulative[i] = total += std::exp(logw[i] - mx);
  PartitionWeights acc;
  for (std::size_t m = 0; m < options_.prediction.particles; ++m)
    acc[seats[rng_.categorical_cumulative(cumulative)].sample(rng_)] += 1.0;
  const double log_predictive = mx + std::log(total);
  MixtureState out = from_weights_pruned(acc, state.time, options_.pruning);
  out.kind = state.kind;
  out.log_evidence = state.log_evidence + log_predictive;
  return {std::move(out), log_predictive};
}

FilterResult FilterEngine::run(const ObservationSequence& seq) {
  seq.validate();
  FilterResult result;
  MixtureState prior = MixtureState::point_mass(Partition(), seq.times[0]);
  for (std::size_t k = 0; k < seq.size(); ++k) {
    MixtureState predicted = k == 0 ? prior : predict(result.steps.back().updated, seq.times[k] - seq.times[k - 1]);
    predicted.time = seq.times[k];
    UpdateResult u = update(predicted, seq.observations[k]);
    result.log_evidence = u.state.log_evidence;
    result.steps.push_back({std::move(predicted), std::move(u.state), u.log_predictive});
  }
  return result;
}

MixtureState filter_init(const Partition& pi0, const EPParams& params, double time) {
  MixtureState s = MixtureState::point_mass(pi0, time);
  s.log_evidence = log_psf(pi0, params);
  return s;
}

MixtureState predict(const MixtureState& state, double delta, const EPParams& params, const PredictionMode& mode,
                     Rng& rng) {
  FilterOptions options;
  options.prediction = mode;
  FilterEngine engine(params, options);
  std::swap(engine.rng(), rng);
  MixtureState out = engine.predict(state, delta);
  std::swap(engine.rng(), rng);
  return out;
}

UpdateResult update(const MixtureState& state, const Partition& pi, const EPParams& params) {
  FilterEngine engine(params, FilterOptions{});
  return engine.update(state, pi);
}

FilterResult filter(const ObservationSequence& seq, const EPParams& params, const FilterOptions& options) {
  FilterEngine engine(params, options);
  return engine.run(seq);
}

std::vector<double> parse_grid_axis(const std::string& text, std::string* name) {
  std::string body = text;
  auto eq = text.find('=');
  if (eq != std::string::npos) {
    if (name) *name = text.substr(0, eq);
    body = text.substr(eq + 1);
  }
  std::vector<double> values;
  auto round12 = [](double v) { return std::round(v * 1e12) / 1e12; };
  if (body.find(':') != std::string::npos) {
    std::stringstream ss(body);
    std::string a, b, c;
    if (!std::getline(ss, a, ':') || !std::getline(ss, b, ':') || !std::getline(ss, c))
      throw std::invalid_argument("grid range must be start:step:stop");
    double start = std::stod(a), step = std::stod(b), stop = std::stod(c);
    if (!(step > 0.0) || stop < start) throw std::invalid_argument("grid range needs step > 0 and stop >= start");
    for (std::size_t i = 0;; ++i) {
      double v = round12(start + i * step);
      if (v > stop + 1e-9) break;
      values.push_back(v);
    }
  } else {
    std::stringstream ss(body);
    std::string item;
    while (std::getline(ss, item, ',')) values.push_back(std::stod(item));
  }
  if (values.empty()) throw std::invalid_argument("grid axis is empty: " + text);
  return values;
}

std::vector<EPParams> make_grid(const std::vector<double>& alphas, const std::vector<double>& thetas) {
  std::vector<EPParams> grid;
  for (double a : alphas)
    for (double t : thetas) grid.push_back({a, t});
  return grid;
}

FitResult fit_grid(const ObservationSequence& seq, const std::vector<EPParams>& grid, const FilterOptions& options,
                   unsigned threads) {
  seq.validate();
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  auto evaluate = [&](const EPParams& p) -> double {
    try {
      p.validate();
    } catch (const std::invalid_argument&) {
      return std::numeric_limits<double>::quiet_NaN();
    }
    return filter(seq, p, options).log_evidence;
  };
  std::vector<double> values(grid.size());
  // Each grid point runs with its own engine, so points can be evaluated concurrently.
  for (std::size_t start = 0; start < grid.size(); start += threads) {
    std::vector<std::future<double>> jobs;
    std::size_t stop = std::min(grid.size(), start + threads);
    for (std::size_t i = start; i < stop; ++i)
      jobs.push_back(std::async(threads > 1 ? std::launch::async : std::launch::deferred, evaluate, grid[i]));
    for (std::size_t i = start; i < stop; ++i) values[i] = jobs[i - start].get();
  }
  FitResult fit;
  fit.best_log_evidence = -std::numeric_limits<double>::infinity();
  bool found = false;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (std::isnan(values[i])) continue;
    fit.evaluations.push_back({grid[i], values[i]});
    const auto& p = grid[i];
    bool better = !found || values[i] > fit.best_log_evidence ||
                  (values[i] == fit.best_log_evidence &&
                   std::tie(p.alpha, p.theta) < std::tie(fit.best.alpha, fit.best.theta));
    if (better) {
      fit.best = p;
      fit.best_log_evidence = values[i];
      found = true;
    }
  }
  if (!found) throw std::invalid_argument("grid contains no valid parameter pair");
  return fit;
}

}  // namespace pdhmm
