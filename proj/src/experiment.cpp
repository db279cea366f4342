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

#include "pdhmm/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace pdhmm {

namespace {

constexpr std::uint64_t kSimulationStream = 4;
constexpr std::uint64_t kSummaryStream = 5;

std::vector<double> axis_from_json(const Json& j, const char* name) {
  if (j.is_string()) return parse_grid_axis(j.get<std::string>());
  if (j.is_array()) return j.get<std::vector<double>>();
  if (j.is_number()) return {j.get<double>()};
  throw ConfigError(std::string("grid axis ") + name + " must be a range string or a list");
}

}  // namespace

void ExperimentConfig::merge(const Json& j) {
  if (!j.is_object()) throw ConfigError("configuration must be a JSON object");
  try {
    const Json& p = j.contains("params") ? j.at("params") : j;
    if (p.contains("alpha") && p.at("alpha").is_number()) params.alpha = p.at("alpha").get<double>();
    if (p.contains("theta") && p.at("theta").is_number()) params.theta = p.at("theta").get<double>();
    if (j.contains("grid")) {
      const Json& g = j.at("grid");
      if (g.contains("alpha")) grid_alpha = axis_from_json(g.at("alpha"), "alpha");
      if (g.contains("theta")) grid_theta = axis_from_json(g.at("theta"), "theta");
    }
    if (j.contains("times")) {
      times = j.at("times").get<std::vector<double>>();
    } else if (j.contains("n_times")) {
      const int n = j.at("n_times").get<int>();
      const double delta = j.value("delta", 1.0), t0 = j.value("t0", 0.0);
      if (n < 1) throw ConfigError("n_times must be positive");
      times.clear();
      for (int k = 0; k < n; ++k) times.push_back(t0 + k * delta);
    }
    if (j.contains("sizes")) {
      const Json& s = j.at("sizes");
      sizes = s.is_array() ? s.get<std::vector<std::uint32_t>>() : std::vector<std::uint32_t>{s.get<std::uint32_t>()};
    }
    if (j.contains("prediction")) prediction = PredictionMode::parse(j.at("prediction").get<std::string>());
    if (j.contains("pruning")) pruning = PruningStrategy::parse(j.at("pruning").get<std::string>());
    if (j.contains("epsilon")) epsilon = j.at("epsilon").get<double>();
    if (j.contains("seed")) seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("draws")) draws = j.at("draws").get<std::size_t>();
    if (j.contains("kappa")) kappa = j.at("kappa").get<double>();
    if (j.contains("bpf_particles")) bpf_particles = j.at("bpf_particles").get<std::size_t>();
    if (j.contains("query_times")) query_times = j.at("query_times").get<std::vector<double>>();
    if (j.contains("forecast_size")) forecast_size = j.at("forecast_size").get<std::uint32_t>();
    if (j.contains("observations")) observations = j.at("observations").get<std::string>();
    if (j.contains("truth")) truth = j.at("truth").get<std::string>();
    if (j.contains("out_dir")) out_dir = j.at("out_dir").get<std::string>();
    if (j.contains("ingest")) {
      const Json& g = j.at("ingest");
      ingest.window = g.value("window", ingest.window);
      if (g.contains("origin")) ingest.origin = g.at("origin").get<double>();
      ingest.time_unit = g.value("time_unit", ingest.time_unit);
      ingest.include_singletons = g.value("include_singletons", ingest.include_singletons);
      ingest.keep_empty = g.value("keep_empty", ingest.keep_empty);
      if (g.contains("days")) ingest.days = g.at("days").get<std::vector<long>>();
      ingest.day_length = g.value("day_length", ingest.day_length);
    }
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("invalid configuration value: ") + e.what());
  } catch (const ConfigError&) {
    throw;
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

ExperimentConfig ExperimentConfig::from_json(const Json& j) {
  ExperimentConfig c;
  c.merge(j);
  return c;
}

ExperimentConfig ExperimentConfig::load(const std::string& path) {
  Json j;
  try {
    j = Json::parse(read_file(path));
  } catch (const Json::exception& e) {
    throw ConfigError("config " + path + " is not valid JSON: " + e.what());
  }
  return from_json(j);
}

void ExperimentConfig::validate() const {
  try {
    params.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  for (std::size_t k = 1; k < times.size(); ++k)
    if (!(times[k] > times[k - 1])) throw ConfigError("times must be strictly increasing");
  if (!sizes.empty() && sizes.size() != 1 && sizes.size() != times.size())
    throw ConfigError("sizes must hold one value or one per time");
  for (auto s : sizes)
    if (s == 0) throw ConfigError("partition sizes must be positive");
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw ConfigError("epsilon must lie in (0, 1)");
  if (!(kappa > 0.0 && kappa < 1.0)) throw ConfigError("kappa must lie in (0, 1)");
  if (draws == 0) throw ConfigError("draws must be positive");
  if (bpf_particles < 2) throw ConfigError("bpf_particles must be at least 2");
}

std::uint32_t ExperimentConfig::size_at(std::size_t k) const {
  if (sizes.empty()) throw ConfigError("no partition sizes configured");
  return sizes.size() == 1 ? sizes[0] : sizes.at(k);
}

FilterOptions ExperimentConfig::filter_options() const {
  FilterOptions o;
  o.prediction = prediction;
  o.pruning = pruning;
  o.seed = seed;
  return o;
}

std::vector<EPParams> ExperimentConfig::grid() const {
  if (grid_alpha.empty() || grid_theta.empty()) throw ConfigError("grid needs both alpha and theta axes");
  return make_grid(grid_alpha, grid_theta);
}

SimulatedExperiment simulate_experiment(const ExperimentConfig& config) {
  config.validate();
  if (config.times.empty()) throw ConfigError("simulation needs a time schedule");
  Rng rng(config.seed, kSimulationStream);
  TransitionSampler move(config.params, config.epsilon);
  SimulatedExperiment out;
  FrequencyVector x = sample_pd(config.params, config.epsilon, rng);
  for (std::size_t k = 0; k < config.times.size(); ++k) {
    if (k > 0) x = move(x, config.times[k] - config.times[k - 1], rng);
    out.sequence.times.push_back(config.times[k]);
    out.sequence.observations.push_back(paintbox_sample(x, config.size_at(k), rng));
    out.truth.push_back(heterozygosity(x));
    out.latent.push_back(x);
  }
  return out;
}

std::vector<double> posterior_draws(const MixtureState& state, const EPParams& params, double epsilon,
                                    std::size_t draws, Rng& rng, const Functional& f) {
  std::vector<double> cumulative;
  double acc = 0.0;
  for (const auto& c : state.components) cumulative.push_back(acc += c.weight);
  if (cumulative.empty()) throw std::invalid_argument("cannot draw from an empty mixture");
  std::vector<double> out;
  out.reserve(draws);
  for (std::size_t i = 0; i < draws; ++i) {
    const auto& lambda = state.components[rng.categorical_cumulative(cumulative)].partition;
    out.push_back(f(sample_pd_conditional(lambda, params, epsilon, rng)));
  }
  return out;
}

double quantile(std::vector<double> v, double level) {
  if (v.empty()) throw std::invalid_argument("quantile of no values");
  std::sort(v.begin(), v.end());
  const double h = (v.size() - 1) * level;
  const std::size_t lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (h - lo) * (v[hi] - v[lo]);
}

SummaryRow summarize(std::vector<double> draws, double time, double kappa) {
  SummaryRow r;
  r.time = time;
  r.mean = std::accumulate(draws.begin(), draws.end(), 0.0) / draws.size();
  std::sort(draws.begin(), draws.end());
  r.lower = quantile(draws, kappa / 2);
  r.upper = quantile(std::move(draws), 1 - kappa / 2);
  return r;
}

std::vector<SummaryRow> summarize_states(const std::vector<MixtureState>& states, const EPParams& params,
                                         double epsilon, std::size_t draws, double kappa, std::uint64_t seed) {
  std::vector<SummaryRow> rows;
  for (std::size_t k = 0; k < states.size(); ++k) {
    Rng rng = Rng(seed, kSummaryStream).split(k);
    rows.push_back(summarize(posterior_draws(states[k], params, epsilon, draws, rng), states[k].time, kappa));
  }
  return rows;
}

std::vector<SummaryRow> summarize_bpf(const BpfResult& result, std::size_t draws, double kappa, std::uint64_t seed) {
  std::vector<SummaryRow> rows;
  for (std::size_t k = 0; k < result.steps.size(); ++k) {
    const auto& e = result.steps[k].ensemble;
    if (e.particles.empty()) throw std::invalid_argument("particle summaries need the kept ensembles");
    Rng rng = Rng(seed, kSummaryStream).split(1000 + k);
    std::vector<double> h;
    h.reserve(draws);
    for (std::size_t i : multinomial_resample(e.normalized_weights(), draws, rng)) h.push_back(heterozygosity(e.particles[i]));
    rows.push_back(summarize(std::move(h), e.time, kappa));
  }
  return rows;
}

std::vector<SummaryRow> independent_prior_summaries(const ObservationSequence& seq, const std::vector<EPParams>& grid,
                                                    double epsilon, std::size_t draws, double kappa,
                                                    std::uint64_t seed) {
  std::vector<SummaryRow> rows;
  for (std::size_t k = 0; k < seq.size(); ++k) {
    const Partition& pi = seq.observations[k];
    EPParams best{};
    double best_lp = -std::numeric_limits<double>::infinity();
    for (const auto& p : grid) {
      try {
        p.validate();
      } catch (const std::invalid_argument&) {
        continue;
      }
      double lp = log_psf(pi, p);
      if (lp > best_lp) {
        best_lp = lp;
        best = p;
      }
    }
    if (!std::isfinite(best_lp)) throw std::invalid_argument("no grid point gives the observation positive probability");
    Rng rng = Rng(seed, kSummaryStream).split(2000 + k);
    auto h = posterior_draws(MixtureState::point_mass(pi, seq.times[k]), best, epsilon, draws, rng);
    rows.push_back(summarize(std::move(h), seq.times[k], kappa));
  }
  return rows;
}

double interval_score(double lower, double upper, double y, double kappa) {
  double s = upper - lower;
  if (y < lower) s += 2.0 / kappa * (lower - y);
  if (y > upper) s += 2.0 / kappa * (y - upper);
  return s;
}

ScoredSeries score_series(const std::vector<SummaryRow>& rows, const std::vector<double>& truth, double kappa) {
  if (rows.size() != truth.size()) throw std::invalid_argument("summary and truth series differ in length");
  if (rows.empty()) throw std::invalid_argument("nothing to score");
  ScoredSeries out;
  for (std::size_t k = 0; k < rows.size(); ++k) {
    if (rows[k].lower > rows[k].upper) throw std::invalid_argument("interval has lower > upper");
    out.time.push_back(rows[k].time);
    out.lower.push_back(rows[k].lower);
    out.upper.push_back(rows[k].upper);
    out.truth.push_back(truth[k]);
    out.scores.push_back(interval_score(rows[k].lower, rows[k].upper, truth[k], kappa));
  }
  out.aggregate = std::accumulate(out.scores.begin(), out.scores.end(), 0.0) / out.scores.size();
  return out;
}

ScoredSeries score_series(const std::vector<SummaryRow>& rows, double kappa) {
  std::vector<double> truth;
  for (const auto& r : rows) {
    if (!r.truth) throw std::invalid_argument("summary rows carry no truth column");
    truth.push_back(*r.truth);
  }
  return score_series(rows, truth, kappa);
}

}  // namespace pdhmm
