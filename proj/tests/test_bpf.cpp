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

#include "doctest.h"

#include <cmath>
#include <numeric>

#include "pdhmm/bpf.hpp"

using namespace pdhmm;

namespace {

double mean_h2(const std::vector<FrequencyVector>& xs) {
  double s = 0.0;
  for (auto& x : xs) s += heterozygosity(x);
  return s / xs.size();
}

// Mean and standard error of repeated evidence estimates (on the natural scale).
std::pair<double, double> evidence_band(const ObservationSequence& seq, const EPParams& params, std::size_t m,
                                        int runs) {
  std::vector<double> z;
  for (int r = 0; r < runs; ++r) {
    BpfOptions o;
    o.particles = m;
    o.seed = 100 + r;
    z.push_back(std::exp(bpf_filter(seq, params, o).log_evidence));
  }
  double mean = std::accumulate(z.begin(), z.end(), 0.0) / runs;
  double var = 0.0;
  for (double v : z) var += (v - mean) * (v - mean);
  var /= runs - 1;
  return {mean, std::sqrt(var / runs)};
}

}  // namespace

TEST_CASE("long gaps return to the stationary law") {
  EPParams params{0.1, 1.5};
  Rng rng(3);
  TransitionSampler move(params, 0.005);
  FrequencyVector start{{1.0}, 0.0};
  std::vector<FrequencyVector> out, prior;
  for (int i = 0; i < 10000; ++i) {
    out.push_back(move(start, 20.0, rng));
    prior.push_back(sample_pd(params, 0.005, rng));
  }
  // E[H2] under PD is (theta + alpha) / (theta + 1).
  CHECK(mean_h2(out) == doctest::Approx((1.5 + 0.1) / 2.5).epsilon(0.03));
  CHECK(mean_h2(prior) == doctest::Approx((1.5 + 0.1) / 2.5).epsilon(0.03));
}

TEST_CASE("short gaps keep the state close") {
  EPParams params{0.1, 1.5};
  Rng rng(4);
  TransitionSampler move(params, 0.001);
  double err_short = 0.0, err_long = 0.0;
  for (int i = 0; i < 300; ++i) {
    auto x = sample_pd(params, 0.001, rng);
    err_short += std::abs(heterozygosity(move(x, 0.002, rng)) - heterozygosity(x));
    err_long += std::abs(heterozygosity(move(x, 5.0, rng)) - heterozygosity(x));
  }
  CHECK(err_short < 0.5 * err_long);
}

TEST_CASE("block count sampling follows the entrance law") {
  EPParams params{0.0, 1.0};
  Rng rng(8);
  TransitionSampler move(params, 0.01);
  auto law = death_entrance_distribution(0.3, 1.0);
  std::vector<double> freq(law.size() + 1, 0.0);
  const int draws = 100000;
  for (int i = 0; i < draws; ++i) freq[std::min<std::size_t>(move.sample_block_count(0.3, rng), law.size())] += 1.0 / draws;
  double tv = 0.0;
  for (std::size_t n = 0; n < law.size(); ++n) tv += std::abs(freq[n] - law[n]);
  CHECK(0.5 * tv < 0.01);
}

TEST_CASE("single observation evidence approaches psf") {
  EPParams params{0.2, 1.0};
  for (auto& pi : {Partition{2, 1}, Partition{4}, Partition{2, 1, 1}}) {
    ObservationSequence seq{{0.0}, {pi}};
    BpfOptions o;
    o.particles = 100000;
    auto r = bpf_filter(seq, params, o);
    auto& e = r.steps[0].ensemble;
    // Standard error of the mean weight from the particles.
    std::vector<double> w;
    for (std::size_t i = 0; i < e.particles.size(); ++i) w.push_back(likelihood(pi, e.particles[i]));
    double mean = std::accumulate(w.begin(), w.end(), 0.0) / w.size();
    double var = 0.0;
    for (double v : w) var += (v - mean) * (v - mean);
    double se = std::sqrt(var / (w.size() - 1) / w.size());
    CHECK(std::exp(r.log_evidence) == doctest::Approx(mean).epsilon(1e-10));
    // Truncation at epsilon biases the estimate by at most a few multiples of epsilon.
    CHECK(std::abs(mean - psf(pi, params)) < 3.0 * se + 0.01 * psf(pi, params));
  }
}

TEST_CASE("two-step evidence agrees with the exact filter") {
  EPParams params{0.1, 1.5};
  ObservationSequence seq{{0.0, 0.3}, {Partition{2, 1}, Partition{1, 1}}};
  FilterOptions fo;
  fo.prediction = PredictionMode::exact();
  double exact = std::exp(filter(seq, params, fo).log_evidence);
  auto [mean, se] = evidence_band(seq, params, 5000, 20);
  CHECK(std::abs(mean - exact) < 3.0 * se + 0.005 * exact);
}

TEST_CASE("ensemble bookkeeping") {
  EPParams params{0.1, 1.0};
  ObservationSequence seq{{0.0, 0.1, 0.2}, {Partition{3, 1}, Partition{2, 2}, Partition{3, 1}}};
  BpfOptions o;
  o.particles = 500;
  o.keep_particles = true;
  auto r = bpf_filter(seq, params, o);
  REQUIRE(r.steps.size() == 3);
  double total = 0.0;
  for (auto& s : r.steps) {
    CHECK(s.ensemble.particles.size() == 500);
    CHECK(s.ensemble.ess >= 1.0);
    CHECK(s.ensemble.ess <= 500.0 + 1e-9);
    auto w = s.ensemble.normalized_weights();
    CHECK(std::accumulate(w.begin(), w.end(), 0.0) == doctest::Approx(1.0));
    total += s.log_predictive;
  }
  CHECK(total == doctest::Approx(r.log_evidence));
  o.keep_particles = false;
  auto r2 = bpf_filter(seq, params, o);
  CHECK(r2.steps[0].ensemble.particles.empty());
  CHECK(r2.steps.back().ensemble.particles.size() == 500);
  CHECK(r2.log_evidence == r.log_evidence);
  o.particles = 1;
  CHECK_THROWS_AS(bpf_filter(seq, params, o), std::invalid_argument);
}

TEST_CASE("resampling preserves the weighted heterozygosity on average") {
  EPParams params{0.1, 1.0};
  Rng rng(21);
  std::vector<FrequencyVector> xs;
  std::vector<double> w;
  for (int i = 0; i < 50; ++i) {
    xs.push_back(sample_pd(params, 0.005, rng));
    w.push_back(likelihood(Partition{4, 1}, xs.back()));
  }
  double s = std::accumulate(w.begin(), w.end(), 0.0), weighted = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) weighted += (w[i] /= s) * heterozygosity(xs[i]);
  double mean = 0.0, sq = 0.0;
  const int runs = 400;
  for (int r = 0; r < runs; ++r) {
    double h = 0.0;
    for (std::size_t i : multinomial_resample(w, xs.size(), rng)) h += heterozygosity(xs[i]) / xs.size();
    mean += h / runs;
    sq += h * h / runs;
  }
  double se = std::sqrt((sq - mean * mean) / runs);
  CHECK(std::abs(mean - weighted) < 4.0 * se);
}

TEST_CASE("impossible observations are reported") {
  // With theta this small the first stick almost surely takes nearly all the mass.
  EPParams params{0.0, 0.01};
  ObservationSequence seq{{0.0}, {Partition{1, 1}}};
  BpfOptions o;
  o.particles = 10;
  o.epsilon = 0.99;
  CHECK_THROWS_AS(bpf_filter(seq, params, o), WeightDegeneracy);
}
