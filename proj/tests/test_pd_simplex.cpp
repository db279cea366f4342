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
#include <map>

#include "oracles.hpp"
#include "pdhmm/ewens_pitman.hpp"
#include "pdhmm/pd_simplex.hpp"

using namespace pdhmm;

namespace {

FrequencyVector random_frequencies(Rng& rng, std::size_t atoms) {
  FrequencyVector x;
  double s = 0.0;
  for (std::size_t i = 0; i < atoms; ++i) {
    x.atoms.push_back(rng.gamma(0.7));
    s += x.atoms.back();
  }
  for (double& v : x.atoms) v /= s;
  std::sort(x.atoms.begin(), x.atoms.end(), std::greater<>());
  return x;
}

}  // namespace

TEST_CASE("truncated PD draws") {
  Rng rng(3);
  for (EPParams p : {EPParams{0.0, 1.0}, EPParams{0.3, 2.0}, EPParams{0.6, -0.4}}) {
    for (int i = 0; i < 200; ++i) {
      auto x = sample_pd(p, 0.005, rng);
      CHECK(x.tail <= 0.005);
      CHECK(std::is_sorted(x.atoms.rbegin(), x.atoms.rend()));
      CHECK(x.atom_mass() + x.tail == doctest::Approx(1.0));
    }
  }
  CHECK_THROWS_AS(sample_pd({0.1, 1.0}, 1.5, rng), std::invalid_argument);
}

TEST_CASE("mean heterozygosity under the prior") {
  Rng rng(5);
  for (EPParams p : {EPParams{0.0, 1.5}, EPParams{0.4, 0.5}}) {
    const int draws = 20000;
    double s = 0.0;
    for (int i = 0; i < draws; ++i) s += heterozygosity(sample_pd(p, 1e-4, rng));
    CHECK(s / draws == doctest::Approx((p.theta + p.alpha) / (p.theta + 1.0)).epsilon(0.02));
  }
}

TEST_CASE("conditional PD reproduces the predictive law") {
  Rng rng(9);
  EPParams params{0.2, 1.0};
  Partition pi{3, 1};
  const int draws = 40000;
  std::map<Partition, double> acc;
  for (int i = 0; i < draws; ++i) {
    auto x = sample_pd_conditional(pi, params, 1e-4, rng);
    CHECK(x.atom_mass() + x.tail == doctest::Approx(1.0));
    for (auto& g : enumerate_partitions(2)) acc[g] += likelihood(g, x) / draws;
  }
  for (auto& g : enumerate_partitions(2)) CHECK(acc[g] == doctest::Approx(crp_conditional(pi, g, params)).epsilon(0.02));
}

TEST_CASE("likelihood agrees with brute force and the power-sum route") {
  Rng rng(17);
  for (int trial = 0; trial < 30; ++trial) {
    auto x = random_frequencies(rng, 1 + trial % 12);
    for (std::uint32_t n = 0; n <= 7; ++n) {
      double s = 0.0;
      for (auto& pi : enumerate_partitions(n)) {
        double v = likelihood(pi, x);
        s += v;
        CHECK(likelihood_power_sum(pi, x) == doctest::Approx(v).epsilon(1e-9).scale(1e-3));
        if (pi.length() <= 3) CHECK(v == doctest::Approx(oracle::likelihood(pi, x.atoms)).epsilon(1e-10));
      }
      CHECK(s == doctest::Approx(1.0).epsilon(1e-10));
    }
  }
}

TEST_CASE("likelihood of large partitions in log space") {
  Rng rng(19);
  auto x = random_frequencies(rng, 90);
  Partition big(std::vector<Part>(60, 1));
  double lp = log_likelihood(big, x);
  CHECK(std::isfinite(lp));
  CHECK(lp < 0.0);
  FrequencyVector few{{0.5, 0.5}, 0.0};
  CHECK(likelihood(Partition{1, 1, 1}, few) == 0.0);
}

TEST_CASE("products of likelihoods expand over coagulations") {
  Rng rng(23);
  for (int trial = 0; trial < 20; ++trial) {
    auto x = random_frequencies(rng, 5 + trial);
    Partition w = crp_simulate(1 + trial % 5, {0.2, 1.0}, rng);
    Partition g = crp_simulate(1 + (trial / 5) % 5, {0.2, 1.0}, rng);
    double rhs = 0.0;
    for (auto& c : coag_with_coefficients(w, g)) rhs += c.coefficient * likelihood(c.target, x);
    CHECK(likelihood(w, x) * likelihood(g, x) == doctest::Approx(rhs).epsilon(1e-9));
  }
}

TEST_CASE("paintbox frequencies") {
  Rng rng(29);
  FrequencyVector x{{0.5, 0.3, 0.2}, 0.0};
  const int draws = 100000;
  std::map<Partition, double> freq;
  for (int i = 0; i < draws; ++i) freq[paintbox_sample(x, 3, rng)] += 1.0 / draws;
  double tv = 0.0;
  for (auto& p : enumerate_partitions(3)) tv += std::abs(freq[p] - likelihood(p, x));
  CHECK(0.5 * tv < 0.01);
  CHECK(empirical_heterozygosity(Partition{2, 2}) == doctest::Approx(0.5));
  CHECK(heterozygosity(x) == doctest::Approx(1.0 - 0.25 - 0.09 - 0.04));
}
