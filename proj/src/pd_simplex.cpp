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

#include "pdhmm/pd_simplex.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace pdhmm {

double FrequencyVector::atom_mass() const { return std::accumulate(atoms.begin(), atoms.end(), 0.0); }

std::vector<double> FrequencyVector::normalized() const {
  double s = atom_mass();
  if (!(s > 0.0)) throw std::invalid_argument("frequency vector has no atom mass");
  std::vector<double> out(atoms);
  for (double& v : out) v /= s;
  return out;
}

namespace {

// Stick-breaking until the residual is at most epsilon; atoms appended unsorted.
double stick_break(const EPParams& params, double epsilon, double scale, std::vector<double>& out, Rng& rng) {
  double r = 1.0;
  for (std::size_t i = 1; r > epsilon; ++i) {
    double v = rng.beta(1.0 - params.alpha, params.theta + i * params.alpha);
    double x = v * r;
    r -= x;
    if (x > 0.0) out.push_back(scale * x);
    if (i > 100'000'000) throw std::runtime_error("stick-breaking did not reach the truncation level");
  }
  return r;
}

void check_epsilon(double epsilon) {
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw std::invalid_argument("truncation epsilon must lie in (0, 1)");
}

}  // namespace

FrequencyVector sample_pd(const EPParams& params, double epsilon, Rng& rng) {
  params.validate();
  check_epsilon(epsilon);
  FrequencyVector x;
  x.tail = stick_break(params, epsilon, 1.0, x.atoms, rng);
  std::sort(x.atoms.begin(), x.atoms.end(), std::greater<>());
  return x;
}

FrequencyVector sample_pd_conditional(const Partition& pi, const EPParams& params, double epsilon, Rng& rng) {
  if (pi.empty() || (pi.length() == 1 && pi[0] == 1)) return sample_pd(params, epsilon, rng);
  params.validate();
  check_epsilon(epsilon);
  const double l = static_cast<double>(pi.length());
  const double w = rng.beta(params.theta + params.alpha * l, pi.size() - params.alpha * l);
  FrequencyVector x;
  std::vector<double> g;
  double gs = 0.0;
  for (Part v : pi.parts()) {
    g.push_back(rng.gamma(v - params.alpha));
    gs += g.back();
  }
  for (double v : g) x.atoms.push_back((1.0 - w) * v / gs);
  // The fresh part is scaled by w; its residual is also kept below epsilon / w.
  EPParams shifted{params.alpha, params.theta + params.alpha * l};
  double level = epsilon / std::max(w, 1.0 - w);
  x.tail = w * stick_break(shifted, level, w, x.atoms, rng);
  std::sort(x.atoms.begin(), x.atoms.end(), std::greater<>());
  return x;
}

Partition paintbox_sample(const FrequencyVector& x, std::uint32_t n, Rng& rng) {
  if (x.atoms.empty()) throw std::invalid_argument("paintbox needs at least one atom");
  std::vector<double> cumulative(x.atoms.size());
  std::partial_sum(x.atoms.begin(), x.atoms.end(), cumulative.begin());
  std::vector<Part> counts(x.atoms.size(), 0);
  for (std::uint32_t i = 0; i < n; ++i) ++counts[rng.categorical_cumulative(cumulative)];
  std::vector<Part> parts;
  for (Part c : counts)
    if (c) parts.push_back(c);
  return Partition(std::move(parts));
}

double log_likelihood(const Partition& pi, const std::vector<double>& atoms) {
  if (pi.empty()) return 0.0;
  const auto classes = size_classes(pi);
  const std::size_t q = classes.size();
  std::vector<std::size_t> stride(q);
  std::size_t states = 1;
  for (std::size_t j = 0; j < q; ++j) {
    stride[j] = states;
    states *= classes[j].count + 1;
  }
  // digit[idx * q + j] is the number of atoms already matched with class j.
  std::vector<std::uint32_t> digit(states * q);
  for (std::size_t idx = 0; idx < states; ++idx)
    for (std::size_t j = 0; j < q; ++j) digit[idx * q + j] = (idx / stride[j]) % (classes[j].count + 1);
  std::vector<double> dp(states, 0.0), pw(q);
  dp[0] = 1.0;
  double log_scale = 0.0;
  for (double x : atoms) {
    if (x <= 0.0) continue;
    for (std::size_t j = 0; j < q; ++j) pw[j] = std::pow(x, static_cast<double>(classes[j].value));
    double mx = 0.0;
    for (std::size_t idx = states; idx-- > 1;) {
      double add = 0.0;
      for (std::size_t j = 0; j < q; ++j)
        if (digit[idx * q + j]) add += dp[idx - stride[j]] * pw[j];
      dp[idx] += add;
      mx = std::max(mx, dp[idx]);
    }
    mx = std::max(mx, dp[0]);
    if (mx < 1e-200 || mx > 1e200) {
      for (double& v : dp) v /= mx;
      log_scale += std::log(mx);
    }
  }
  double top = dp[states - 1];
  if (!(top > 0.0)) return -std::numeric_limits<double>::infinity();
  double r = std::log(top) + log_scale + log_combinatorial_coefficient(pi);
  for (const auto& c : classes) r += log_factorial(c.count);
  return r;
}

double log_likelihood(const Partition& pi, const FrequencyVector& x) { return log_likelihood(pi, x.normalized()); }

double likelihood(const Partition& pi, const FrequencyVector& x) { return std::exp(log_likelihood(pi, x)); }

double power_sum(const FrequencyVector& x, unsigned k) {
  double s = 0.0;
  for (double v : x.normalized()) s += std::pow(v, static_cast<double>(k));
  return s;
}

double likelihood_power_sum(const Partition& pi, const FrequencyVector& x) {
  if (pi.empty()) return 1.0;
  const auto atoms = x.normalized();
  std::vector<double> p(pi.size() + 1, 0.0);
  for (std::size_t k = 1; k < p.size(); ++k)
    for (double v : atoms) p[k] += std::pow(v, static_cast<double>(k));
  const std::size_t l = pi.length();
  // Restricted growth strings enumerate the set partitions of the parts.
  std::vector<Part> sums(l, 0);
  std::vector<std::size_t> sizes(l, 0);
  std::vector<double> fact(l + 1, 1.0);
  for (std::size_t i = 1; i <= l; ++i) fact[i] = fact[i - 1] * i;
  double total = 0.0;
  std::function<void(std::size_t, std::size_t)> rec = [&](std::size_t i, std::size_t used) {
    if (i == l) {
      double term = 1.0;
      for (std::size_t b = 0; b < used; ++b) {
        term *= p[sums[b]] * fact[sizes[b] - 1];
        if (sizes[b] % 2 == 0) term = -term;
      }
      total += term;
      return;
    }
    for (std::size_t b = 0; b <= used && b < l; ++b) {
      sums[b] += pi[i];
      ++sizes[b];
      rec(i + 1, std::max(used, b + 1));
      sums[b] -= pi[i];
      --sizes[b];
    }
  };
  rec(0, 0);
  return total * combinatorial_coefficient(pi).get_d();
}

double heterozygosity(const FrequencyVector& x) { return 1.0 - power_sum(x, 2); }

double empirical_heterozygosity(const Partition& pi) {
  if (pi.empty()) return 0.0;
  double n = pi.size(), s = 0.0;
  for (Part v : pi.parts()) s += (v / n) * (v / n);
  return 1.0 - s;
}

}  // namespace pdhmm
