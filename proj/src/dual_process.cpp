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

#include "pdhmm/dual_process.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>
#include <string>
#include <tuple>

#include <boost/multiprecision/mpfr.hpp>

namespace pdhmm {

double death_rate(std::uint32_t k, double theta) {
  if (k == 0) return 0.0;
  double r = 0.5 * k * (theta + k - 1.0);
  return r > 0.0 ? r : 0.0;
}

namespace {

using boost::multiprecision::mpfr_float;

// Lowest reachable block count.
std::uint32_t floor_state(double theta) { return theta > 0.0 ? 0 : 1; }

// Spectral solution for distinct rates. Returns false when cancellation
// makes the result unreliable.
bool finite_row_spectral(std::uint32_t l, double t, double theta, std::vector<double>& row) {
  const std::uint32_t b = std::min(floor_state(theta), l);
  std::vector<long double> r(l + 1);
  for (std::uint32_t k = 0; k <= l; ++k) r[k] = k <= b ? 0.0L : 0.5L * k * (theta + k - 1.0L);
  // a[j] = sum_{i>j} log(r_i - r_j)
  std::vector<long double> a(l + 1, 0.0L), lower(l + 1, 0.0L);
  for (std::uint32_t j = b; j <= l; ++j)
    for (std::uint32_t i = j + 1; i <= l; ++i) a[j] += std::log(r[i] - r[j]);
  row.assign(l + 1, 0.0);
  long double log_prefix = 0.0L;  // sum_{k=n+1}^{l} log r_k
  const long double eps = std::numeric_limits<long double>::epsilon();
  for (std::uint32_t n = l + 1; n-- > b;) {
    if (n < l) {
      log_prefix += std::log(r[n + 1]);
      for (std::uint32_t j = n + 1; j <= l; ++j) lower[j] += std::log(r[j] - r[n]);
    }
    long double sum = 0.0L, largest = 0.0L;
    for (std::uint32_t j = n; j <= l; ++j) {
      long double mag = std::exp(log_prefix - r[j] * t - a[j] - lower[j]);
      largest = std::max(largest, mag);
      sum += ((j - n) % 2 ? -mag : mag);
    }
    if (largest * eps * 8 * (l - n + 1) > 1e-13L) return false;
    row[n] = static_cast<double>(std::clamp(sum, 0.0L, 1.0L));
  }
  return true;
}

// Uniformization of the bidiagonal generator in chunks with moderate Poisson means.
std::vector<double> finite_row_uniformized(std::uint32_t l, double t, double theta) {
  const std::uint32_t b = std::min(floor_state(theta), l);
  std::vector<double> r(l + 1);
  for (std::uint32_t k = 0; k <= l; ++k) r[k] = k <= b ? 0.0 : death_rate(k, theta);
  std::vector<double> p(l + 1, 0.0);
  p[l] = 1.0;
  const double lam = r[l];
  if (lam <= 0.0 || t <= 0.0) return p;
  const auto chunks = static_cast<std::size_t>(std::ceil(lam * t / 100.0));
  const double q = lam * t / chunks;
  std::vector<double> v(l + 1), acc(l + 1), next(l + 1);
  for (std::size_t c = 0; c < chunks; ++c) {
    v = p;
    double w = std::exp(-q), cum = w;
    for (std::uint32_t k = 0; k <= l; ++k) acc[k] = w * v[k];
    for (std::size_t m = 1; cum < 1.0 - 1e-17 || m <= q; ++m) {
      for (std::uint32_t k = 0; k <= l; ++k)
        next[k] = v[k] * (1.0 - r[k] / lam) + (k < l ? v[k + 1] * r[k + 1] / lam : 0.0);
      v.swap(next);
      w *= q / m;
      cum += w;
      for (std::uint32_t k = 0; k <= l; ++k) acc[k] += w * v[k];
      if (m > 10 * q + 200) break;
    }
    p = acc;
  }
  double s = 0.0;
  for (double x : p) s += x;
  for (double& x : p) x /= s;
  return p;
}

// log |k-th series term| for d_n
long double log_entrance_term(std::uint32_t n, std::uint32_t k, double t, double theta) {
  if (n == 0 && k == 0) return 0.0L;
  const long double th = theta;
  long double rk = 0.5L * k * (th + k - 1.0L);
  return -rk * t + std::log(2.0L * k + th - 1.0L) + std::lgamma(th + n + k - 1.0L) - std::lgamma(th + n) -
         std::lgamma(n + 1.0L) - std::lgamma(k - n + 1.0L);
}

struct SeriesPlan {
  std::uint32_t n_max = 0;
  std::vector<std::uint32_t> k_max;
  double largest_log_term = -std::numeric_limits<double>::infinity();
};

SeriesPlan plan_entrance_series(double t, double theta, double tol) {
  SeriesPlan plan;
  const double cut = std::log(tol) - 12.0;
  double prev_lead = std::numeric_limits<double>::infinity();
  for (std::uint32_t n = 0;; ++n) {
    std::uint32_t k = n == 0 ? 1 : n;
    double lead = static_cast<double>(log_entrance_term(n, k, t, theta));
    double prev = lead;
    double peak = std::max(lead, n == 0 ? 0.0 : lead);
    for (++k;; ++k) {
      double cur = static_cast<double>(log_entrance_term(n, k, t, theta));
      peak = std::max(peak, cur);
      if (cur < cut && cur < prev) break;
      prev = cur;
      if (k > 10'000'000) throw NumericalInstability("entrance series does not converge");
    }
    plan.k_max.push_back(k);
    plan.largest_log_term = std::max(plan.largest_log_term, peak);
    plan.n_max = n;
    if (n >= 2 && lead < cut && lead < prev_lead) break;
    prev_lead = lead;
  }
  return plan;
}

std::vector<double> entrance_double(double t, double theta, const SeriesPlan& plan) {
  std::vector<double> d(plan.n_max + 1, 0.0);
  for (std::uint32_t n = 0; n <= plan.n_max; ++n) {
    long double s = n == 0 ? 1.0L : 0.0L;
    for (std::uint32_t k = (n == 0 ? 1 : n); k <= plan.k_max[n]; ++k) {
      long double mag = std::exp(log_entrance_term(n, k, t, theta));
      s += ((k - n) % 2 ? -mag : mag);
    }
    d[n] = static_cast<double>(s);
  }
  return d;
}

std::vector<double> entrance_mpfr(double t, double theta, const SeriesPlan& plan, double tol) {
  const double lost_bits = (plan.largest_log_term - std::log(tol)) / std::log(2.0);
  const unsigned bits = static_cast<unsigned>(std::max(0.0, lost_bits)) + 80;
  const unsigned digits = static_cast<unsigned>(bits * 0.30103) + 2;
  const unsigned saved = mpfr_float::default_precision();
  mpfr_float::default_precision(digits);
  std::vector<double> d(plan.n_max + 1, 0.0);
  const mpfr_float th(theta), tt(t);
  const mpfr_float step = exp(-tt);
  for (std::uint32_t n = 0; n <= plan.n_max; ++n) {
    std::uint32_t k = n == 0 ? 1 : n;
    // a = (2k + theta - 1) (theta + n)_(k-1) / (n! (k - n)!) at the first k.
    mpfr_float a = 2 * k + th - 1;
    for (std::uint32_t i = 0; i + 1 < k; ++i) a *= th + n + i;
    for (std::uint32_t i = 2; i <= n; ++i) a /= i;
    for (std::uint32_t i = 2; i <= k - n; ++i) a /= i;
    mpfr_float e = exp(-(k * (th + k - 1) / 2) * tt);  // exp(-r_k t)
    mpfr_float g = exp(-(k + th / 2) * tt);             // exp(-(r_{k+1} - r_k) t)
    mpfr_float s = n == 0 ? mpfr_float(1) : mpfr_float(0);
    for (;; ++k) {
      mpfr_float term = a * e;
      if ((k - n) % 2) s -= term; else s += term;
      if (k == plan.k_max[n]) break;
      a *= (2 * k + th + 1) / (2 * k + th - 1) * (th + n + k - 1) / (k + 1 - n);
      e *= g;
      g *= step;
    }
    d[n] = static_cast<double>(s);
  }
  mpfr_float::default_precision(saved);
  return d;
}

std::mutex entrance_mutex;
std::map<std::tuple<double, double, double>, std::vector<double>> entrance_cache;

}  // namespace

std::vector<double> death_entrance_distribution(double t, double theta, const EntranceOptions& options) {
  if (!(theta > 0.0)) throw std::domain_error("entrance law requires theta > 0");
  if (!(t > 0.0)) throw std::domain_error("entrance law requires t > 0");
  if (t < options.min_time && !options.allow_small_time)
    throw NumericalInstability("entrance series at t = " + std::to_string(t) + " is below the minimum time " +
                               std::to_string(options.min_time));
  const auto key = std::make_tuple(t, theta, options.tolerance);
  {
    std::lock_guard<std::mutex> lock(entrance_mutex);
    if (auto it = entrance_cache.find(key); it != entrance_cache.end()) return it->second;
  }
  SeriesPlan plan = plan_entrance_series(t, theta, options.tolerance);
  // Terms carry a relative error of about 1e-18 in extended precision.
  const double cancellation = std::exp(plan.largest_log_term) * 1e-17;
  std::vector<double> d = cancellation < options.tolerance ? entrance_double(t, theta, plan)
                                                           : entrance_mpfr(t, theta, plan, options.tolerance);
  for (double& v : d) v = std::clamp(v, 0.0, 1.0);
  while (d.size() > 1 && d.back() < options.tolerance * 1e-3) d.pop_back();
  std::lock_guard<std::mutex> lock(entrance_mutex);
  entrance_cache.emplace(key, d);
  return d;
}

double death_entrance_prob(std::uint32_t n, double t, double theta, const EntranceOptions& options) {
  auto d = death_entrance_distribution(t, theta, options);
  return n < d.size() ? d[n] : 0.0;
}

std::vector<double> death_finite_row(std::uint32_t l, double t, double theta) {
  if (t < 0.0) throw std::domain_error("negative time");
  if (t == 0.0 || l == 0) {
    std::vector<double> row(l + 1, 0.0);
    row[l] = 1.0;
    return row;
  }
  std::vector<double> row;
  if (finite_row_spectral(l, t, theta, row)) return row;
  return finite_row_uniformized(l, t, theta);
}

double death_finite_prob(std::uint32_t l, std::uint32_t n, double t, double theta) {
  if (n > l) return 0.0;
  return death_finite_row(l, t, theta)[n];
}

double dual_transition(const Partition& lambda, const Partition& omega, double t, double theta) {
  if (!precedes(omega, lambda)) return 0.0;
  return coag_marginal_coefficient(omega, lambda) * death_finite_prob(lambda.size(), omega.size(), t, theta);
}

std::vector<std::pair<Partition, double>> dual_transition_row(const Partition& lambda, double t, double theta) {
  auto row = death_finite_row(lambda.size(), t, theta);
  auto out = sub_partitions(lambda);
  for (auto& [omega, h] : out) h *= row[omega.size()];
  std::erase_if(out, [](const auto& e) { return e.second <= 0.0; });
  return out;
}

Partition gillespie_propagate(const Partition& lambda, double t, double theta, Rng& rng) {
  std::vector<Part> parts = lambda.parts();
  std::uint32_t n = lambda.size();
  double clock = 0.0;
  while (n > 0) {
    double rate = death_rate(n, theta);
    if (rate <= 0.0) break;
    clock += rng.exponential(rate);
    if (clock > t) break;
    std::uint64_t u = rng.uniform_int(n);
    std::size_t i = 0;
    while (u >= parts[i]) u -= parts[i++];
    // Shrink the last row of equal length so the order is kept.
    while (i + 1 < parts.size() && parts[i + 1] == parts[i]) ++i;
    if (--parts[i] == 0) parts.pop_back();
    --n;
  }
  return Partition::from_sorted(std::move(parts));
}

Partition sample_sub_partition(const Partition& lambda, std::uint32_t m, Rng& rng) {
  if (m > lambda.size()) throw std::invalid_argument("subsample larger than the partition");
  std::vector<std::uint32_t> owner, hits(lambda.length(), 0);
  for (std::size_t i = 0; i < lambda.length(); ++i) owner.insert(owner.end(), lambda[i], static_cast<std::uint32_t>(i));
  for (std::uint32_t k = 0; k < m; ++k) {
    std::swap(owner[k], owner[k + rng.uniform_int(owner.size() - k)]);
    ++hits[owner[k]];
  }
  std::vector<Part> parts;
  for (std::uint32_t h : hits)
    if (h) parts.push_back(h);
  std::sort(parts.begin(), parts.end(), std::greater<>());
  return Partition::from_sorted(std::move(parts));
}

DualProcess::DualProcess(double theta) : theta_(theta) {}

const std::vector<double>& DualProcess::finite_row(std::uint32_t l, double t) {
  auto key = std::make_pair(l, t);
  auto it = rows_.find(key);
  if (it == rows_.end()) it = rows_.emplace(key, death_finite_row(l, t, theta_)).first;
  return it->second;
}

const std::vector<DualProcess::SubsampleEntry>& DualProcess::sub_partitions(const Partition& lambda) {
  auto it = subs_.find(lambda);
  if (it == subs_.end()) {
    if (subs_.size() > 4096) subs_.clear();
    std::vector<SubsampleEntry> law;
    sub_partition_counts(lambda).for_each([&](CountsWeights::Counts c, double h) {
      law.push_back({std::vector<std::uint32_t>(c.begin(), c.end()), CountsWeights::size(c), h});
    });
    it = subs_.emplace(lambda, std::move(law)).first;
  }
  return it->second;
}

MixtureState DualProcess::propagate_exact(const MixtureState& state, double t, const PruningStrategy& pruning) {
  CountsWeights acc;
  for (const auto& c : state.components) {
    const auto& row = finite_row(c.partition.size(), t);
    for (const auto& e : sub_partitions(c.partition)) {
      double w = c.weight * e.probability * row[e.size];
      if (w > 0.0) acc.add(e.counts, w);
    }
  }
  MixtureState out = from_weights_pruned(acc, state.time + t, pruning, kPropagationFloor);
  out.log_evidence = state.log_evidence;
  out.kind = state.kind;
  return out;
}

MixtureState DualProcess::propagate_monte_carlo(const MixtureState& state, double t, std::size_t particles,
                                                Rng& rng, const PruningStrategy& pruning) {
  struct Source {
    std::vector<double> row;             // cumulative block-count law
    std::vector<std::uint32_t> owner;    // part index of every square, in any order
  };
  std::vector<double> cumulative;
  std::vector<Source> sources;
  double acc_w = 0.0;
  Part top = 0;
  for (const auto& c : state.components) {
    cumulative.push_back(acc_w += c.weight);
    Source src{finite_row(c.partition.size(), t), {}};
    for (std::size_t n = 1; n < src.row.size(); ++n) src.row[n] += src.row[n - 1];
    for (std::size_t i = 0; i < c.partition.length(); ++i)
      src.owner.insert(src.owner.end(), c.partition[i], static_cast<std::uint32_t>(i));
    if (!c.partition.empty()) top = std::max(top, c.partition[0]);
    sources.push_back(std::move(src));
  }
  CountsWeights acc;
  std::vector<std::uint32_t> left, hist(top + 1, 0);
  for (std::size_t m = 0; m < particles; ++m) {
    const std::size_t i = rng.categorical_cumulative(cumulative);
    const Partition& lambda = state.components[i].partition;
    auto& owner = sources[i].owner;
    const std::uint32_t l = lambda.size();
    const auto n = static_cast<std::uint32_t>(rng.categorical_cumulative(sources[i].row));
    // A uniform n-subset of squares: draw the n kept or the l - n removed, whichever is fewer.
    const bool keep = n <= l - n;
    const std::uint32_t draws = keep ? n : l - n;
    if (keep)
      left.assign(lambda.length(), 0);
    else
      left.assign(lambda.begin(), lambda.end());
    for (std::uint32_t k = 0; k < draws; ++k) {
      std::swap(owner[k], owner[k + rng.uniform_int(l - k)]);
      if (keep)
        ++left[owner[k]];
      else
        --left[owner[k]];
    }
    for (std::uint32_t v : left) ++hist[v];
    hist[0] = 0;
    acc.add(hist, 1.0);
    for (std::uint32_t v : left) hist[v] = 0;
  }
  MixtureState out = from_weights_pruned(acc, state.time + t, pruning, kPropagationFloor);
  out.log_evidence = state.log_evidence;
  out.kind = state.kind;
  return out;
}

MixtureState DualProcess::propagate(const MixtureState& state, double t, const PropagationMode& mode, Rng& rng,
                                    const PruningStrategy& pruning) {
  if (t < 0.0) throw std::domain_error("negative propagation time");
  if (mode.kind == PropagationMode::Kind::exact) return propagate_exact(state, t, pruning);
  return propagate_monte_carlo(state, t, mode.particles, rng, pruning);
}

MixtureState propagate_mixture(const MixtureState& state, double t, double theta, const PropagationMode& mode,
                               Rng& rng) {
  DualProcess dual(theta);
  return dual.propagate(state, t, mode, rng);
}

}  // namespace pdhmm
