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

#include "pdhmm/filter.hpp"

using namespace pdhmm;

namespace {

ObservationSequence two_step(const Partition& a, const Partition& b, double delta) {
  return {{0.0, delta}, {a, b}};
}

// Evidence of (pi0, pi1) through the dual transition row and the seating law.
double two_step_evidence(const Partition& a, const Partition& b, double delta, const EPParams& params) {
  double s = 0.0;
  for (auto& [omega, p] : dual_transition_row(a, delta, params.theta)) s += p * crp_conditional(omega, b, params);
  return psf(a, params) * s;
}

FilterOptions exact_options() {
  FilterOptions o;
  o.prediction = PredictionMode::exact();
  return o;
}

}  // namespace

TEST_CASE("sequence validation") {
  ObservationSequence s{{0.0, 0.0}, {Partition{1}, Partition{2}}};
  CHECK_THROWS_AS(s.validate(), std::invalid_argument);
  s.times = {0.0};
  CHECK_THROWS_AS(s.validate(), std::invalid_argument);
  s = {{}, {}};
  CHECK_THROWS_AS(s.validate(), std::invalid_argument);
  s = {{0.0, 1.0, 0.5}, {Partition{1}, Partition{1}, Partition{1}}};
  CHECK_THROWS_AS(s.validate(), std::invalid_argument);
}

TEST_CASE("mode parsing") {
  CHECK(PredictionMode::parse("exact").kind == PredictionMode::Kind::exact);
  auto m = PredictionMode::parse("montecarlo:500");
  CHECK(m.kind == PredictionMode::Kind::monte_carlo);
  CHECK(m.particles == 500);
  CHECK(PredictionMode::parse("auto").kind == PredictionMode::Kind::automatic);
  CHECK_THROWS(PredictionMode::parse("fast"));
  CHECK_THROWS(PredictionMode::parse("montecarlo:0"));
  CHECK(PredictionMode::parse(m.to_string()).particles == 500);
}

TEST_CASE("first update gives a point mass with psf evidence") {
  EPParams params{0.1, 1.5};
  Partition pi{3, 1, 1};
  auto u = update(MixtureState::point_mass(Partition()), pi, params);
  REQUIRE(u.state.support_size() == 1);
  CHECK(u.state.components[0].partition == pi);
  CHECK(u.log_predictive == doctest::Approx(log_psf(pi, params)));
  auto init = filter_init(pi, params);
  CHECK(init.log_evidence == doctest::Approx(u.state.log_evidence));
}

TEST_CASE("a single draw carries no information") {
  EPParams params{0.3, 0.7};
  MixtureState s = MixtureState::from_weights({{Partition{2, 1}, 0.4}, {Partition{1}, 0.6}}, 0.0);
  auto u = update(s, Partition{1}, params);
  CHECK(u.log_predictive == doctest::Approx(0.0).epsilon(1e-12));
  for (auto& c : u.state.components) CHECK((c.partition.size() == 2 || c.partition.size() == 4));
}

TEST_CASE("two-step evidence matches the transition-row route") {
  for (EPParams params : {EPParams{0.0, 1.0}, EPParams{0.1, 1.5}, EPParams{0.5, 0.5}})
    for (double delta : {0.05, 0.3, 2.0})
      for (auto& a : {Partition{2, 1}, Partition{3}, Partition{1, 1, 1}})
        for (auto& b : {Partition{1, 1}, Partition{2, 1}, Partition{3}}) {
          auto r = filter(two_step(a, b, delta), params, exact_options());
          CHECK(r.log_evidence == doctest::Approx(std::log(two_step_evidence(a, b, delta, params))).epsilon(1e-10));
        }
}

TEST_CASE("evidence does not depend on the direction of time") {
  EPParams params{0.2, 1.2};
  ObservationSequence seq{{0.0, 0.1, 0.35, 0.4}, {Partition{3, 1}, Partition{2, 2}, Partition{4}, Partition{2, 1, 1}}};
  double fwd = filter(seq, params, exact_options()).log_evidence;
  double bwd = filter(seq.reversed(), params, exact_options()).log_evidence;
  CHECK(fwd == doctest::Approx(bwd).epsilon(1e-10));
}

TEST_CASE("long gaps decouple the observations") {
  EPParams params{0.1, 1.5};
  Partition a{3, 2}, b{2, 2, 1};
  auto r = filter(two_step(a, b, 60.0), params, exact_options());
  CHECK(r.log_evidence == doctest::Approx(log_psf(a, params) + log_psf(b, params)).epsilon(1e-8));
}

TEST_CASE("filtered weights are normalized and sizes bounded") {
  EPParams params{0.1, 1.0};
  ObservationSequence seq{{0.0, 0.2, 0.4}, {Partition{3, 2}, Partition{4, 1}, Partition{2, 2, 1}}};
  auto r = filter(seq, params, exact_options());
  std::uint32_t bound = 0;
  for (std::size_t k = 0; k < seq.size(); ++k) {
    bound += seq.observations[k].size();
    CHECK(r.steps[k].updated.total_weight() == doctest::Approx(1.0).epsilon(1e-12));
    for (auto& c : r.steps[k].updated.components) {
      CHECK(c.partition.size() <= bound);
      CHECK(c.partition.size() >= seq.observations[k].size());
    }
    CHECK(r.steps[k].updated.time == seq.times[k]);
  }
}

TEST_CASE("Monte Carlo prediction tracks the exact filter") {
  EPParams params{0.1, 1.0};
  ObservationSequence seq{{0.0, 0.3, 0.6}, {Partition{3, 1}, Partition{2, 1, 1}, Partition{3, 1}}};
  auto exact = filter(seq, params, exact_options());
  FilterOptions mc;
  mc.prediction = PredictionMode::monte_carlo(100000);
  mc.seed = 11;
  auto approx = filter(seq, params, mc);
  CHECK(std::abs(exact.log_evidence - approx.log_evidence) < 0.02);
  CHECK(total_variation(exact.steps.back().updated, approx.steps.back().updated) < 0.03);
}

TEST_CASE("automatic mode switches on support and work") {
  EPParams params{0.1, 1.0};
  ObservationSequence seq{{0.0, 0.3}, {Partition{2, 1}, Partition{2, 1}}};
  FilterOptions a;
  a.prediction = PredictionMode::automatic(1000);
  auto r1 = filter(seq, params, a);
  auto r2 = filter(seq, params, exact_options());
  CHECK(r1.log_evidence == doctest::Approx(r2.log_evidence).epsilon(1e-12));
  a.prediction.exact_work_limit = 1.0;
  a.seed = 3;
  auto r3 = filter(seq, params, a);
  CHECK(r3.log_evidence != r2.log_evidence);
}

TEST_CASE("sampled updates keep the exact predictive") {
  EPParams params{0.2, 1.5};
  MixtureState prior;
  prior.components = {{Partition{3, 1}, 0.25}, {Partition{2, 2, 1}, 0.5}, {Partition{4}, 0.25}};
  const Partition pi{2, 1, 1};
  UpdateResult exact = update(prior, pi, params);
  FilterOptions a;
  a.prediction = PredictionMode::automatic(200000);
  a.prediction.exact_update_limit = 1.0;
  a.seed = 5;
  FilterEngine engine(params, a);
  UpdateResult sampled = engine.update(prior, pi);
  CHECK(sampled.log_predictive == doctest::Approx(exact.log_predictive).epsilon(1e-12));
  CHECK(total_variation(sampled.state, exact.state) < 0.01);
  a.prediction.exact_update_limit = 1e9;
  FilterEngine enumerating(params, a);
  CHECK(enumerating.update(prior, pi).state.components.size() == exact.state.components.size());
}

TEST_CASE("pruning keeps the requested components") {
  EPParams params{0.1, 1.0};
  ObservationSequence seq{{0.0, 0.1, 0.2}, {Partition{4, 2}, Partition{3, 2, 1}, Partition{5, 1}}};
  FilterOptions o = exact_options();
  o.pruning = PruningStrategy::top(5);
  auto r = filter(seq, params, o);
  for (auto& s : r.steps) {
    CHECK(s.updated.support_size() <= 5);
    CHECK(s.predicted.support_size() <= 5);
  }
  auto full = filter(seq, params, exact_options());
  CHECK(std::abs(full.log_evidence - r.log_evidence) < 0.5);
}

TEST_CASE("grid axes and fitting") {
  std::string name;
  auto a = parse_grid_axis("alpha=0:0.1:0.5", &name);
  CHECK(name == "alpha");
  REQUIRE(a.size() == 6);
  CHECK(a[3] == 0.3);
  auto t = parse_grid_axis("theta=0.5:0.25:2");
  CHECK(t.size() == 7);
  CHECK(t.back() == 2.0);
  CHECK(parse_grid_axis("1,2.5").size() == 2);
  CHECK_THROWS(parse_grid_axis("alpha=0:-1:2"));

  ObservationSequence seq{{0.0, 0.2}, {Partition{2, 1}, Partition{3}}};
  auto grid = make_grid({0.0, 0.1, 1.2}, {0.5, 1.5});
  auto fit = fit_grid(seq, grid, exact_options(), 2);
  CHECK(fit.evaluations.size() == 4);
  double best = -1e300;
  for (auto& e : fit.evaluations) best = std::max(best, e.log_evidence);
  CHECK(fit.best_log_evidence == best);
  CHECK(fit_grid(seq, grid, exact_options(), 1).best_log_evidence == best);
}
