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

#include "pdhmm/smoother.hpp"

using namespace pdhmm;

namespace {

FilterOptions exact_options() {
  FilterOptions o;
  o.prediction = PredictionMode::exact();
  return o;
}

const ObservationSequence kSeq{{0.0, 0.15, 0.4, 0.5},
                               {Partition{3, 1}, Partition{2, 2}, Partition{4}, Partition{2, 1, 1}}};

void check_same(const MixtureState& a, const MixtureState& b, double tol) {
  REQUIRE(a.support_size() == b.support_size());
  for (std::size_t i = 0; i < a.support_size(); ++i) {
    CHECK(a.components[i].partition == b.components[i].partition);
    CHECK(std::abs(a.components[i].weight - b.components[i].weight) <= tol);
  }
}

}  // namespace

TEST_CASE("smoothing at the last time equals filtering") {
  for (EPParams params : {EPParams{0.1, 1.5}, EPParams{0.0, 0.8}}) {
    auto r = smooth_all(kSeq, params, exact_options());
    check_same(r.smoothed.back(), r.forward.steps.back().updated, 1e-10);
    CHECK(r.smoothed.back().kind == "smoothed");
  }
}

TEST_CASE("every smoothing step recovers the total evidence") {
  EPParams params{0.2, 1.1};
  auto r = smooth_all(kSeq, params, exact_options());
  for (auto& s : r.smoothed) CHECK(s.log_evidence == doctest::Approx(r.forward.log_evidence).epsilon(1e-10));
  CHECK(r.backward[0].log_evidence == doctest::Approx(r.forward.log_evidence).epsilon(1e-10));
}

TEST_CASE("smoothing at the first time equals the reversed filter") {
  EPParams params{0.1, 1.5};
  auto r = smooth_all(kSeq, params, exact_options());
  check_same(r.smoothed.front(), r.backward.front().at_observation, 1e-10);
  // Same through the filter run on the reversed sequence.
  auto rev = filter(kSeq.reversed(), params, exact_options());
  check_same(r.smoothed.front(), rev.steps.back().updated, 1e-10);
}

TEST_CASE("combining with the empty backward law is the identity") {
  EPParams params{0.3, 0.9};
  auto f = filter(kSeq, params, exact_options()).steps[1].updated;
  auto c = combine(f, MixtureState::point_mass(Partition(), f.time), params);
  check_same(c, f, 1e-12);
  CHECK(c.log_evidence == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("interpolation between observations") {
  EPParams params{0.1, 1.0};
  auto r = smooth_all(kSeq, params, exact_options());
  // At an observation time it returns the smoothed law.
  check_same(interpolate(r, kSeq, 0.15, params, exact_options()), r.smoothed[1], 0.0);
  // Between t_1 and t_2 the two propagated laws still recover the total evidence.
  FilterEngine engine(params, exact_options());
  double t = 0.3;
  auto fwd = engine.predict(r.forward.steps[1].updated, t - kSeq.times[1]);
  auto bwd = engine.predict(r.backward[2].at_observation, kSeq.times[2] - t);
  auto c = combine(fwd, bwd, params);
  CHECK(c.log_evidence + r.forward.steps[1].updated.log_evidence + r.backward[2].log_evidence ==
        doctest::Approx(r.forward.log_evidence).epsilon(1e-10));
  auto mid = interpolate(r, kSeq, t, params, exact_options());
  CHECK(mid.total_weight() == doctest::Approx(1.0));
  CHECK(mid.kind == "interpolated");
  check_same(mid, c, 1e-14);
  // Before the first observation only backward information is used.
  auto early = interpolate(r, kSeq, -0.2, params, exact_options());
  auto prior = engine.predict(r.backward[0].at_observation, 0.2);
  check_same(early, prior, 1e-12);
}

TEST_CASE("forecasting propagates the last filtering law") {
  EPParams params{0.1, 1.5};
  auto r = filter(kSeq, params, exact_options());
  auto f = forecast_state(kSeq, 0.9, params, exact_options());
  CHECK(f.kind == "forecast");
  CHECK(f.time == 0.9);
  FilterEngine engine(params, exact_options());
  check_same(f, engine.predict(r.steps.back().updated, 0.4), 1e-14);
  CHECK_THROWS(forecast_state(r.steps.back().updated, 0.1, params, exact_options()));
}

TEST_CASE("forecasts forget the start") {
  EPParams params{0.1, 1.5};
  for (auto& lam : {Partition{6}, Partition{3, 2, 1}, Partition{1, 1, 1, 1, 1, 1}, Partition{2, 2}}) {
    auto f = forecast_state(MixtureState::point_mass(lam), 50.0, params, exact_options());
    CHECK(f.weight_of(Partition()) + f.weight_of(Partition{1}) >= 0.999);
    double tv = 0.0;
    for (auto& [g, p] : predictive_partition_law(f, 3, params)) tv += std::abs(p - psf(g, params));
    CHECK(0.5 * tv < 1e-3);
  }
}

TEST_CASE("sampled forecast partitions follow the predictive law") {
  EPParams params{0.2, 1.0};
  auto state = MixtureState::from_weights({{Partition{2, 1}, 0.5}, {Partition{1}, 0.3}, {Partition(), 0.2}}, 0.0);
  auto law = predictive_partition_law(state, 3, params);
  double s = 0.0;
  for (auto& e : law) s += e.second;
  CHECK(s == doctest::Approx(1.0));
  Rng rng(5, 2);
  std::map<Partition, double> freq;
  const int draws = 100000;
  for (int i = 0; i < draws; ++i) freq[forecast_partition(state, 3, params, rng)] += 1.0 / draws;
  double tv = 0.0;
  for (auto& [g, p] : law) tv += std::abs(freq[g] - p);
  CHECK(0.5 * tv < 0.01);
}
