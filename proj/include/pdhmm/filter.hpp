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
#include <string>
#include <vector>

#include "pdhmm/dual_process.hpp"
#include "pdhmm/ewens_pitman.hpp"
#include "pdhmm/mixture.hpp"
#include "pdhmm/partition.hpp"
#include "pdhmm/rng.hpp"

namespace pdhmm {

struct ObservationSequence {
  std::vector<double> times;
  std::vector<Partition> observations;

  std::size_t size() const { return times.size(); }
  // Times must be finite and strictly increasing, one observation per time.
  void validate() const;
  ObservationSequence reversed() const;
};

struct PredictionMode {
  enum class Kind { exact, monte_carlo, automatic };
  Kind kind = Kind::automatic;
  std::size_t particles = 10000;
  // Automatic mode propagates exactly while the support has at most this many
  // partitions and the subsample enumeration stays below exact_work_limit.
  std::size_t exact_support_limit = 200;
  double exact_work_limit = 2e5;
  // Automatic mode also samples an update when the summed coag_enumeration_size
  // of its components exceeds this; the sampled update keeps the predictive exact.
  double exact_update_limit = 2e6;

  static PredictionMode exact() { return {Kind::exact}; }
  static PredictionMode monte_carlo(std::size_t m) { return {Kind::monte_carlo, m}; }
  static PredictionMode automatic(std::size_t m = 10000) { return {Kind::automatic, m}; }
  // Parses "exact", "montecarlo[:M]" or "auto[:M]".
  static PredictionMode parse(const std::string& text);
  std::string to_string() const;
};

struct FilterOptions {
  PredictionMode prediction;
  PruningStrategy pruning;
  std::uint64_t seed = 1;
};

struct UpdateResult {
  MixtureState state;
  double log_predictive;
};

struct FilterStep {
  MixtureState predicted;
  MixtureState updated;
  double log_predictive;
};

struct FilterResult {
  std::vector<FilterStep> steps;
  double log_evidence = 0.0;
};

// Stateful helper that owns the caches and random stream of one filtering run.
class FilterEngine {
 public:
  FilterEngine(const EPParams& params, const FilterOptions& options, std::uint64_t stream = 0);

  const EPParams& params() const { return params_; }
  const FilterOptions& options() const { return options_; }

  MixtureState predict(const MixtureState& state, double delta);
  UpdateResult update(const MixtureState& state, const Partition& pi);
  FilterResult run(const ObservationSequence& seq);
  PsfTable& psf_table() { return psf_; }
  Rng& rng() { return rng_; }

 private:
  UpdateResult sampled_update(const MixtureState& state, const Partition& pi);

  EPParams params_;
  FilterOptions options_;
  DualProcess dual_;
  PsfTable psf_;
  Rng rng_;
};

// Posterior after the first observation: {pi0 : 1} with evidence log psf(pi0).
MixtureState filter_init(const Partition& pi0, const EPParams& params, double time = 0.0);
MixtureState predict(const MixtureState& state, double delta, const EPParams& params, const PredictionMode& mode,
                     Rng& rng);
UpdateResult update(const MixtureState& state, const Partition& pi, const EPParams& params);
FilterResult filter(const ObservationSequence& seq, const EPParams& params, const FilterOptions& options);

struct GridPoint {
  EPParams params;
  double log_evidence;
};

struct FitResult {
  std::vector<GridPoint> evaluations;
  EPParams best;
  double best_log_evidence;
};

// Values of a "name=start:step:stop" or "name=v1,v2,..." text.
std::vector<double> parse_grid_axis(const std::string& text, std::string* name = nullptr);
std::vector<EPParams> make_grid(const std::vector<double>& alphas, const std::vector<double>& thetas);

// Maximizes log evidence over the grid; invalid pairs are skipped and ties
// go to the lexicographically smallest (alpha, theta).
FitResult fit_grid(const ObservationSequence& seq, const std::vector<EPParams>& grid, const FilterOptions& options,
                   unsigned threads = 0);

}  // namespace pdhmm
