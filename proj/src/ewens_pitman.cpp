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

#include "pdhmm/ewens_pitman.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace pdhmm {

void EPParams::validate() const {
  if (!(alpha >= 0.0 && alpha < 1.0))
    throw std::invalid_argument("alpha must lie in [0, 1), got " + std::to_string(alpha));
  if (!(theta > -alpha))
    throw std::invalid_argument("theta must exceed -alpha, got " + std::to_string(theta));
}

namespace {

constexpr std::uint32_t kDirectProductLimit = 20;

// log prod_{i=1}^{k-1} (theta + i alpha)
double log_new_table_factor(std::size_t k, const EPParams& p) {
  if (k <= 1) return 0.0;
  if (p.alpha == 0.0) return (k - 1) * std::log(p.theta);
  double r = p.theta / p.alpha;
  return (k - 1) * std::log(p.alpha) + std::lgamma(r + k) - std::lgamma(r + 1.0);
}

// log (a)_(m) for a > 0
double log_rising(double a, std::uint32_t m) { return std::lgamma(a + m) - std::lgamma(a); }

}  // namespace

double log_psf(const Partition& p, const EPParams& params) {
  params.validate();
  if (p.empty()) return 0.0;
  if (p.size() <= kDirectProductLimit) return std::log(psf(p, params));
  double r = log_combinatorial_coefficient(p) + log_new_table_factor(p.length(), params) -
             log_rising(params.theta + 1.0, p.size() - 1);
  for (Part v : p.parts()) r += log_rising(1.0 - params.alpha, v - 1);
  return r;
}

double psf(const Partition& p, const EPParams& params) {
  params.validate();
  if (p.empty()) return 1.0;
  if (p.size() > kDirectProductLimit) return std::exp(log_psf(p, params));
  long double r = combinatorial_coefficient(p).get_d();
  for (std::size_t i = 1; i < p.length(); ++i) r *= params.theta + i * static_cast<long double>(params.alpha);
  for (std::uint32_t i = 1; i < p.size(); ++i) r /= params.theta + static_cast<long double>(i);
  for (Part v : p.parts())
    for (Part b = 1; b < v; ++b) r *= b - static_cast<long double>(params.alpha);
  return static_cast<double>(r);
}

PsfTable::PsfTable(const EPParams& params) : params_(params) {
  params_.validate();
  log_new_tables_ = {0.0, 0.0};
  log_rising_ = {0.0, 0.0};
  log_block_ = {0.0};
}

void PsfTable::reserve(std::uint32_t n) {
  while (log_new_tables_.size() <= n) {
    std::size_t k = log_new_tables_.size();
    log_new_tables_.push_back(log_new_tables_.back() + std::log(params_.theta + (k - 1) * params_.alpha));
  }
  while (log_rising_.size() <= n) {
    std::size_t m = log_rising_.size();
    log_rising_.push_back(log_rising_.back() + std::log(params_.theta + (m - 1)));
  }
  while (log_block_.size() <= n) {
    std::size_t b = log_block_.size();
    log_block_.push_back(log_block_.back() + std::log(b - params_.alpha));
  }
}

double PsfTable::log_new_tables(std::size_t k) {
  reserve(static_cast<std::uint32_t>(k));
  return log_new_tables_[k];
}

double PsfTable::log_rising(std::uint32_t n) {
  reserve(n);
  return log_rising_[n];
}

double PsfTable::log_block(std::uint32_t b) {
  reserve(b);
  return log_block_[b];
}

double PsfTable::log_psf(const Partition& p) {
  if (p.empty()) return 0.0;
  reserve(p.size());
  double r = log_factorial(p.size()) + log_new_tables_[p.length()] - log_rising_[p.size()];
  std::size_t i = 0;
  const auto& parts = p.parts();
  while (i < parts.size()) {
    std::size_t j = i;
    while (j < parts.size() && parts[j] == parts[i]) ++j;
    r += (j - i) * (log_block_[parts[i] - 1] - log_factorial(parts[i])) - log_factorial(j - i);
    i = j;
  }
  return r;
}

double PsfTable::log_psf(std::span<const std::uint32_t> counts) {
  std::uint32_t n = 0, k = 0;
  for (std::size_t v = 1; v < counts.size(); ++v) {
    n += counts[v] * static_cast<std::uint32_t>(v);
    k += counts[v];
  }
  if (n == 0) return 0.0;
  reserve(n);
  double r = log_factorial(n) + log_new_tables_[k] - log_rising_[n];
  for (std::size_t v = 1; v < counts.size(); ++v)
    if (counts[v]) r += counts[v] * (log_block_[v - 1] - log_factorial(v)) - log_factorial(counts[v]);
  return r;
}

Partition crp_simulate(std::uint32_t n, const EPParams& params, Rng& rng) {
  params.validate();
  std::vector<Part> tables;
  for (std::uint32_t i = 0; i < n; ++i) {
    double u = rng.uniform() * (params.theta + i);
    std::size_t k = 0;
    for (; k < tables.size(); ++k) {
      u -= tables[k] - params.alpha;
      if (u < 0.0) break;
    }
    if (i == 0 || k == tables.size())
      tables.push_back(1);
    else
      ++tables[k];
  }
  return Partition(std::move(tables));
}

double log_crp_conditional(const Partition& omega, const Partition& gamma, const EPParams& params) {
  return JointSeating(omega, gamma, params).log_probability() - log_psf(omega, params);
}

double crp_conditional(const Partition& omega, const Partition& gamma, const EPParams& params) {
  if (omega.size() + gamma.size() <= 64) {
    double base = psf(omega, params);
    double s = 0.0;
    for (auto& c : coag_with_coefficients_exact(omega, gamma))
      s += c.coefficient.get_d() * psf(c.target, params);
    return s / base;
  }
  return std::exp(log_crp_conditional(omega, gamma, params));
}

std::vector<std::pair<Partition, double>> coag_kernel(const Partition& omega, const Partition& gamma,
                                                      const EPParams& params) {
  params.validate();
  PsfTable table(params);
  auto terms = coag_log_coefficients(omega, gamma);
  std::vector<std::pair<Partition, double>> out;
  double mx = -std::numeric_limits<double>::infinity();
  for (auto& c : terms) {
    out.emplace_back(c.target, c.log_coefficient + table.log_psf(c.target));
    mx = std::max(mx, out.back().second);
  }
  double s = 0.0;
  for (auto& [mu, w] : out) s += (w = std::exp(w - mx));
  for (auto& [mu, w] : out) w /= s;
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  return out;
}

namespace {

double log_add(double a, double b) {
  if (a == -std::numeric_limits<double>::infinity()) return b;
  if (b == -std::numeric_limits<double>::infinity()) return a;
  return a > b ? a + std::log1p(std::exp(b - a)) : b + std::log1p(std::exp(a - b));
}

constexpr double kMaxSeatingStates = 2e7;

}  // namespace

JointSeating::JointSeating(const Partition& omega, const Partition& gamma, const EPParams& params) {
  params.validate();
  // The pair weight is symmetric, so the smaller state space goes to the columns.
  auto states_of = [](const Partition& p) {
    double s = 1.0;
    for (auto& c : size_classes(p)) s *= c.count + 1.0;
    return s;
  };
  const bool swap = states_of(omega) < states_of(gamma);
  const Partition& rows = swap ? gamma : omega;
  const Partition& cols = swap ? omega : gamma;
  rows_ = rows.parts();
  cols_ = size_classes(cols);
  std::size_t nstates = 1;
  for (auto& c : cols_) {
    radix_.push_back(nstates);
    nstates *= c.count + 1;
  }
  if (static_cast<double>(nstates) * (rows_.size() + 1) > kMaxSeatingStates)
    throw std::length_error("joint seating recursion too large for " + omega.to_string() + " and " + gamma.to_string());
  PsfTable table(params);
  const std::uint32_t n = omega.size() + gamma.size();
  table.reserve(n + 1);
  // Labelled configurations: the pair factor (1-alpha)_(s+r-1) / ((1-alpha)_(s-1) (1-alpha)_(r-1)).
  pair_.assign(rows_.size(), std::vector<double>(cols_.size()));
  for (std::size_t i = 0; i < rows_.size(); ++i)
    for (std::size_t j = 0; j < cols_.size(); ++j)
      pair_[i][j] = table.log_block(rows_[i] + cols_[j].value - 1) - table.log_block(rows_[i] - 1) -
                    table.log_block(cols_[j].value - 1);
  const double ninf = -std::numeric_limits<double>::infinity();
  // State = remaining count of each column class, in mixed radix.
  std::size_t full = 0;
  for (std::size_t j = 0; j < cols_.size(); ++j) full += cols_[j].count * radix_[j];
  layers_.assign(rows_.size() + 1, std::vector<double>(nstates, ninf));
  layers_[0][full] = 0.0;
  for (std::size_t i = 0; i < rows_.size(); ++i) {
    const auto& prev = layers_[i];
    auto& next = layers_[i + 1];
    for (std::size_t st = 0; st < nstates; ++st) {
      if (prev[st] == ninf) continue;
      work_ += 1.0;
      next[st] = log_add(next[st], prev[st]);
      for (std::size_t j = 0; j < cols_.size(); ++j) {
        std::size_t rem = (st / radix_[j]) % (cols_[j].count + 1);
        if (rem == 0) continue;
        next[st - radix_[j]] = log_add(next[st - radix_[j]], prev[st] + std::log(double(rem)) + pair_[i][j]);
      }
    }
  }
  // Blocks of the merged partition: all rows plus unmatched columns.
  double base = log_combinatorial_coefficient(omega) + log_combinatorial_coefficient(gamma) - table.log_rising(n);
  for (Part v : omega.parts()) base += table.log_block(v - 1);
  for (Part v : gamma.parts()) base += table.log_block(v - 1);
  final_ = layers_.back();
  log_total_ = ninf;
  if (n == 0) {
    log_total_ = 0.0;
    return;
  }
  for (std::size_t st = 0; st < nstates; ++st) {
    if (final_[st] == ninf) continue;
    std::size_t unmatched = 0;
    for (std::size_t j = 0; j < cols_.size(); ++j) unmatched += (st / radix_[j]) % (cols_[j].count + 1);
    final_[st] += table.log_new_tables(rows_.size() + unmatched);
    log_total_ = log_add(log_total_, final_[st]);
  }
  log_total_ += base;
}

Partition JointSeating::sample(Rng& rng) const {
  const double ninf = -std::numeric_limits<double>::infinity();
  auto pick = [&](const std::vector<double>& logw) {
    double mx = *std::max_element(logw.begin(), logw.end());
    std::vector<double> cum(logw.size());
    double acc = 0.0;
    for (std::size_t k = 0; k < logw.size(); ++k) cum[k] = acc += logw[k] == ninf ? 0.0 : std::exp(logw[k] - mx);
    return rng.categorical_cumulative(cum);
  };
  std::size_t st = pick(final_);
  std::vector<Part> parts;
  for (std::size_t j = 0; j < cols_.size(); ++j)
    for (std::size_t r = (st / radix_[j]) % (cols_[j].count + 1); r > 0; --r) parts.push_back(cols_[j].value);
  for (std::size_t i = rows_.size(); i-- > 0;) {
    // Predecessors of st: row i left alone, or row i took one block of class j.
    std::vector<double> w(cols_.size() + 1, ninf);
    w[0] = layers_[i][st];
    for (std::size_t j = 0; j < cols_.size(); ++j) {
      std::size_t rem = (st / radix_[j]) % (cols_[j].count + 1);
      if (rem == cols_[j].count) continue;
      w[j + 1] = layers_[i][st + radix_[j]] + std::log(double(rem + 1)) + pair_[i][j];
    }
    std::size_t c = pick(w);
    if (c == 0) {
      parts.push_back(rows_[i]);
    } else {
      parts.push_back(rows_[i] + cols_[c - 1].value);
      st += radix_[c - 1];
    }
  }
  return Partition(parts);
}

Partition crp_conditional_simulate(const Partition& lambda, std::uint32_t m, const EPParams& params, Rng& rng) {
  params.validate();
  std::vector<Part> tables(lambda.begin(), lambda.end());
  std::vector<Part> fresh(tables.size(), 0);
  std::uint32_t seated = lambda.size();
  for (std::uint32_t c = 0; c < m; ++c, ++seated) {
    double u = rng.uniform() * (params.theta + seated);
    std::size_t k = 0;
    for (; k < tables.size(); ++k) {
      u -= tables[k] - params.alpha;
      if (u < 0.0) break;
    }
    if (seated == 0 || k == tables.size()) {
      tables.push_back(1);
      fresh.push_back(1);
    } else {
      ++tables[k];
      ++fresh[k];
    }
  }
  std::vector<Part> out;
  for (Part v : fresh)
    if (v) out.push_back(v);
  return Partition(std::move(out));
}

std::vector<std::pair<Partition, double>> crp_predictive_law(const Partition& lambda, std::uint32_t m,
                                                             const EPParams& params) {
  std::vector<std::pair<Partition, double>> out;
  for (auto& g : enumerate_partitions(m)) {
    double v = crp_conditional(lambda, g, params);
    out.emplace_back(std::move(g), v);
  }
  return out;
}

}  // namespace pdhmm
