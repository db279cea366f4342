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

using namespace pdhmm;

namespace {

const std::vector<EPParams> kGrid{{0.0, 0.5}, {0.0, 1.5}, {0.1, 0.5}, {0.1, 1.5}, {0.5, 0.5}, {0.5, 1.5}};

// Ewens formula for alpha = 0.
double ewens(const Partition& p, double theta) {
  double r = std::lgamma(p.size() + 1.0) + p.length() * std::log(theta) - std::lgamma(theta + p.size()) +
             std::lgamma(theta);
  for (auto& [v, a] : multiplicities(p)) r -= a * std::log(double(v)) + std::lgamma(a + 1.0);
  return std::exp(r);
}

}  // namespace

TEST_CASE("parameter validation") {
  CHECK_NOTHROW((EPParams{0.0, 0.1}).validate());
  CHECK_NOTHROW((EPParams{0.5, -0.4}).validate());
  CHECK_THROWS_AS((EPParams{1.0, 1.0}).validate(), std::invalid_argument);
  CHECK_THROWS_AS((EPParams{-0.1, 1.0}).validate(), std::invalid_argument);
  CHECK_THROWS_AS((EPParams{0.2, -0.2}).validate(), std::invalid_argument);
  CHECK_THROWS_AS((psf(Partition{1}, EPParams{0.0, 0.0})), std::invalid_argument);
}

TEST_CASE("psf sums to one over P_n") {
  for (const auto& params : kGrid)
    for (std::uint32_t n = 0; n <= 12; ++n) {
      double s = 0.0;
      for (auto& p : enumerate_partitions(n)) s += psf(p, params);
      CHECK(s == doctest::Approx(1.0).epsilon(1e-10));
    }
}

TEST_CASE("psf matches the seating enumeration and the Ewens formula") {
  for (const auto& params : kGrid)
    for (unsigned n = 1; n <= 6; ++n)
      for (auto& [p, prob] : oracle::seating_law(Partition(), n, params.alpha, params.theta))
        CHECK(psf(p, params) == doctest::Approx(prob).epsilon(1e-12));
  for (double theta : {0.5, 1.5, 4.0})
    for (std::uint32_t n : {5u, 17u, 25u, 30u})
      for (auto& p : enumerate_partitions(n)) CHECK(psf(p, {0.0, theta}) == doctest::Approx(ewens(p, theta)).epsilon(1e-11));
}

TEST_CASE("log psf agrees with the cached table") {
  for (const auto& params : kGrid) {
    PsfTable table(params);
    for (std::uint32_t n = 0; n <= 30; n += 3)
      for (auto& p : enumerate_partitions(n)) {
        double lp = log_psf(p, params);
        CHECK(std::exp(lp) == doctest::Approx(psf(p, params)).epsilon(1e-12));
        CHECK(table.log_psf(p) == doctest::Approx(lp).epsilon(1e-12));
      }
  }
  // Negative theta stays a probability law.
  EPParams neg{0.5, -0.25};
  double s = 0.0;
  for (auto& p : enumerate_partitions(9)) s += psf(p, neg);
  CHECK(s == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("conditional predictive law") {
  for (const auto& params : kGrid)
    for (std::uint32_t n = 0; n <= 4; ++n)
      for (auto& w : enumerate_partitions(n))
        for (std::uint32_t m = 0; m <= 4; ++m) {
          auto brute = oracle::seating_law(w, m, params.alpha, params.theta);
          double s = 0.0;
          for (auto& g : enumerate_partitions(m)) {
            double c = crp_conditional(w, g, params);
            s += c;
            CHECK(c == doctest::Approx(brute[g]).epsilon(1e-11));
            CHECK(std::exp(log_crp_conditional(w, g, params)) == doctest::Approx(c).epsilon(1e-11));
          }
          CHECK(s == doctest::Approx(1.0).epsilon(1e-12));
        }
}

TEST_CASE("coagulation kernel is a law on the coagulation set") {
  EPParams params{0.1, 1.5};
  auto k = coag_kernel(Partition{2, 1}, Partition{1, 1}, params);
  double s = 0.0;
  for (auto& [mu, p] : k) {
    CHECK(mu.size() == 5);
    s += p;
  }
  CHECK(s == doctest::Approx(1.0));
}

TEST_CASE("CRP simulation frequencies") {
  Rng rng(7);
  EPParams params{0.3, 0.8};
  const int draws = 200000;
  std::map<Partition, double> freq;
  for (int i = 0; i < draws; ++i) freq[crp_simulate(4, params, rng)] += 1.0 / draws;
  double tv = 0.0;
  for (auto& p : enumerate_partitions(4)) tv += std::abs(freq[p] - psf(p, params));
  CHECK(0.5 * tv < 0.01);

  std::map<Partition, double> cond;
  Partition lam{3, 1};
  for (int i = 0; i < draws; ++i) cond[crp_conditional_simulate(lam, 3, params, rng)] += 1.0 / draws;
  tv = 0.0;
  for (auto& g : enumerate_partitions(3)) tv += std::abs(cond[g] - crp_conditional(lam, g, params));
  CHECK(0.5 * tv < 0.01);
}

TEST_CASE("joint seating total matches the coagulation sum") {
  Rng rng(31);
  for (EPParams params : {EPParams{0.0, 1.0}, EPParams{0.1, 1.5}, EPParams{0.5, -0.3}, EPParams{0.7, 4.0}})
    for (int rep = 0; rep < 60; ++rep) {
      Partition a = crp_simulate(1 + rng.uniform_int(14), params, rng);
      Partition b = crp_simulate(rng.uniform_int(12), params, rng);
      if (rep % 2) std::swap(a, b);
      double s = 0.0;
      for (auto& c : coag_log_coefficients(a, b)) s += std::exp(c.log_coefficient + log_psf(c.target, params));
      JointSeating js(a, b, params);
      CHECK(js.log_probability() == doctest::Approx(std::log(s)).epsilon(1e-11));
      CHECK(JointSeating(b, a, params).log_probability() == doctest::Approx(js.log_probability()).epsilon(1e-12));
    }
  CHECK(JointSeating(Partition(), Partition(), {0.1, 1.0}).log_probability() == 0.0);
  CHECK(std::exp(JointSeating(Partition{2, 1}, Partition(), {0.1, 1.0}).log_probability()) ==
        doctest::Approx(psf(Partition{2, 1}, {0.1, 1.0})));
}

TEST_CASE("joint seating draws follow the coagulation kernel") {
  EPParams params{0.2, 0.9};
  Rng rng(32);
  for (auto [a, b] : {std::pair{Partition{3, 1, 1}, Partition{2, 1}}, std::pair{Partition{1, 1}, Partition{4, 2, 1, 1}}}) {
    JointSeating js(a, b, params);
    std::map<Partition, double> freq;
    const int draws = 100000;
    for (int i = 0; i < draws; ++i) freq[js.sample(rng)] += 1.0 / draws;
    double tv = 0.0;
    for (auto& [mu, p] : coag_kernel(a, b, params)) tv += std::abs(freq[mu] - p);
    CHECK(0.5 * tv < 0.015);
  }
}
