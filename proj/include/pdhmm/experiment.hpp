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
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "pdhmm/bpf.hpp"
#include "pdhmm/filter.hpp"
#include "pdhmm/ingest.hpp"
#include "pdhmm/io.hpp"
#include "pdhmm/pd_simplex.hpp"

namespace pdhmm {

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct ExperimentConfig {
  EPParams params{0.1, 1.5};
  std::vector<double> grid_alpha, grid_theta;
  std::vector<double> times;        // observation schedule
  std::vector<std::uint32_t> sizes;  // one per time, or a single value for all
  PredictionMode prediction;
  PruningStrategy pruning;
  double epsilon = 0.005;
  std::uint64_t seed = 1;
  std::size_t draws = 10000;  // posterior draws behind each summary
  double kappa = 0.05;
  std::size_t bpf_particles = 10000;
  std::vector<double> query_times;  // for interpolate and forecast
  std::uint32_t forecast_size = 0;  // partition size of a forecast sample, 0 for none
  std::string observations, truth, out_dir = ".";
  IngestOptions ingest;

  // Applies the keys found in j on top of the current values.
  void merge(const Json& j);
  static ExperimentConfig from_json(const Json& j);
  static ExperimentConfig load(const std::string& path);
  void validate() const;
  std::uint32_t size_at(std::size_t k) const;
  FilterOptions filter_options() const;
  std::vector<EPParams> grid() const;
};

struct SimulatedExperiment {
  ObservationSequence sequence;
  std::vector<FrequencyVector> latent;
  std::vector<double> truth;  // heterozygosity of the latent state at each time
};

SimulatedExperiment simulate_experiment(const ExperimentConfig& config);

using Functional = std::function<double(const FrequencyVector&)>;

// Draws of f(X) for X from the mixture of conditional PD laws in `state`.
std::vector<double> posterior_draws(const MixtureState& state, const EPParams& params, double epsilon,
                                    std::size_t draws, Rng& rng, const Functional& f = heterozygosity);
// Mean and the kappa/2, 1 - kappa/2 empirical quantiles (linear interpolation between order statistics).
SummaryRow summarize(std::vector<double> draws, double time, double kappa);
double quantile(std::vector<double> sorted, double level);

std::vector<SummaryRow> summarize_states(const std::vector<MixtureState>& states, const EPParams& params,
                                         double epsilon, std::size_t draws, double kappa, std::uint64_t seed);
// Summaries from the final weighted ensembles of a particle filter run; needs keep_particles.
std::vector<SummaryRow> summarize_bpf(const BpfResult& result, std::size_t draws, double kappa, std::uint64_t seed);

// Each time point on its own: (alpha, theta) maximizing psf(pi^k) over the grid,
// then the conditional PD law given pi^k.
std::vector<SummaryRow> independent_prior_summaries(const ObservationSequence& seq, const std::vector<EPParams>& grid,
                                                    double epsilon, std::size_t draws, double kappa,
                                                    std::uint64_t seed);

double interval_score(double lower, double upper, double y, double kappa);

struct ScoredSeries {
  std::vector<double> time, lower, upper, truth, scores;
  double aggregate = 0.0;  // mean of scores
};

ScoredSeries score_series(const std::vector<SummaryRow>& rows, const std::vector<double>& truth, double kappa);
ScoredSeries score_series(const std::vector<SummaryRow>& rows, double kappa);

}  // namespace pdhmm
