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

#include "pdhmm/partition.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <functional>
#include <limits>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

namespace pdhmm {

namespace {

constexpr std::size_t kLogFactorialTable = 8192;

const std::vector<double>& log_factorial_table() {
  static const std::vector<double> table = [] {
    std::vector<double> t(kLogFactorialTable);
    t[0] = 0.0;
    for (std::size_t i = 1; i < t.size(); ++i) t[i] = t[i - 1] + std::log(static_cast<double>(i));
    return t;
  }();
  return table;
}

mpz_class factorial_exact(std::uint64_t n) {
  mpz_class r;
  mpz_fac_ui(r.get_mpz_t(), n);
  return r;
}

}  // namespace

double log_factorial(std::uint64_t n) {
  if (n < kLogFactorialTable) return log_factorial_table()[n];
  return std::lgamma(static_cast<double>(n) + 1.0);
}

double log_binomial(std::uint64_t n, std::uint64_t k) {
  if (k > n) return -std::numeric_limits<double>::infinity();
  return log_factorial(n) - log_factorial(k) - log_factorial(n - k);
}

mpz_class binomial_exact(std::uint64_t n, std::uint64_t k) {
  mpz_class r;
  if (k > n) return r;
  mpz_bin_uiui(r.get_mpz_t(), n, k);
  return r;
}

Partition::Partition(std::initializer_list<Part> parts) : Partition(std::vector<Part>(parts)) {}

Partition::Partition(std::vector<Part> parts) : parts_(std::move(parts)) {
  std::uint64_t total = 0;
  for (Part p : parts_) {
    if (p == 0) throw std::invalid_argument("partition parts must be positive");
    total += p;
  }
  if (total > std::numeric_limits<std::uint32_t>::max())
    throw std::invalid_argument("partition too large");
  std::sort(parts_.begin(), parts_.end(), std::greater<>());
  size_ = static_cast<std::uint32_t>(total);
}

Partition Partition::from_sorted(std::vector<Part> parts) {
  Partition p;
  std::uint32_t total = 0;
  for (Part v : parts) total += v;
  p.parts_ = std::move(parts);
  p.size_ = total;
  return p;
}

std::strong_ordering operator<=>(const Partition& a, const Partition& b) noexcept {
  if (auto c = a.size_ <=> b.size_; c != 0) return c;
  return std::lexicographical_compare_three_way(a.parts_.begin(), a.parts_.end(),
                                                b.parts_.begin(), b.parts_.end());
}

std::string Partition::to_string() const {
  std::string s = "[";
  for (std::size_t i = 0; i < parts_.size(); ++i) {
    if (i) s += ',';
    s += std::to_string(parts_[i]);
  }
  s += ']';
  return s;
}

Partition Partition::parse(std::string_view text) {
  std::vector<Part> parts;
  std::size_t i = 0;
  auto skip = [&] {
    while (i < text.size() && (text[i] == ' ' || text[i] == '\t')) ++i;
  };
  skip();
  if (i >= text.size() || text[i] != '[') throw std::invalid_argument("partition must start with '['");
  ++i;
  skip();
  if (i < text.size() && text[i] == ']') {
    ++i;
  } else {
    while (true) {
      skip();
      std::uint64_t v = 0;
      std::size_t start = i;
      while (i < text.size() && text[i] >= '0' && text[i] <= '9') {
        v = v * 10 + static_cast<std::uint64_t>(text[i] - '0');
        if (v > std::numeric_limits<Part>::max()) throw std::invalid_argument("part too large");
        ++i;
      }
      if (i == start) throw std::invalid_argument("expected a part in partition text");
      parts.push_back(static_cast<Part>(v));
      skip();
      if (i < text.size() && text[i] == ',') {
        ++i;
        continue;
      }
      if (i < text.size() && text[i] == ']') {
        ++i;
        break;
      }
      throw std::invalid_argument("malformed partition text");
    }
  }
  skip();
  if (i != text.size()) throw std::invalid_argument("trailing characters after partition");
  return Partition(std::move(parts));
}

std::size_t PartitionHash::operator()(std::span<const Part> parts) const noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (Part v : parts) {
    h ^= v;
    h *= 0x100000001b3ULL;
  }
  return static_cast<std::size_t>(h ^ (h >> 29));
}

std::ostream& operator<<(std::ostream& os, const Partition& p) { return os << p.to_string(); }

std::vector<SizeClass> size_classes(const Partition& p) {
  std::vector<SizeClass> out;
  for (Part v : p.parts()) {
    if (!out.empty() && out.back().value == v)
      ++out.back().count;
    else
      out.push_back({v, 1});
  }
  return out;
}

std::map<Part, std::uint32_t> multiplicities(const Partition& p) {
  std::map<Part, std::uint32_t> m;
  for (Part v : p.parts()) ++m[v];
  return m;
}

std::vector<Partition> enumerate_partitions(std::uint32_t n) {
  std::vector<Partition> out;
  std::vector<Part> cur;
  std::function<void(std::uint32_t, Part)> rec = [&](std::uint32_t rest, Part max_part) {
    if (rest == 0) {
      out.push_back(Partition::from_sorted(cur));
      return;
    }
    for (Part v = std::min<Part>(rest, max_part); v >= 1; --v) {
      cur.push_back(v);
      rec(rest - v, v);
      cur.pop_back();
    }
  };
  rec(n, n);
  std::sort(out.begin(), out.end());
  return out;
}

mpz_class combinatorial_coefficient(const Partition& p) {
  mpz_class r = factorial_exact(p.size());
  for (Part v : p.parts()) r /= factorial_exact(v);
  for (const auto& c : size_classes(p)) r /= factorial_exact(c.count);
  return r;
}

double log_combinatorial_coefficient(const Partition& p) {
  double r = log_factorial(p.size());
  for (Part v : p.parts()) r -= log_factorial(v);
  for (const auto& c : size_classes(p)) r -= log_factorial(c.count);
  return r;
}

bool precedes(const Partition& lower, const Partition& upper) {
  if (lower.length() > upper.length()) return false;
  for (std::size_t i = 0; i < lower.length(); ++i)
    if (lower[i] > upper[i]) return false;
  return true;
}

namespace {

// Partitions obtained by removing one square from a removable corner.
template <class F>
void for_each_corner_removal(const Partition& p, F&& f) {
  const auto& parts = p.parts();
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i + 1 < parts.size() && parts[i] == parts[i + 1]) continue;
    std::vector<Part> next = parts;
    if (--next[i] == 0) next.erase(next.begin() + static_cast<std::ptrdiff_t>(i));
    f(Partition::from_sorted(std::move(next)), i);
  }
}

}  // namespace

std::vector<Partition> lower_set(std::span<const Partition> set) {
  std::unordered_set<Partition, PartitionHash> seen;
  std::deque<Partition> queue;
  for (const auto& p : set)
    if (seen.insert(p).second) queue.push_back(p);
  while (!queue.empty()) {
    Partition cur = std::move(queue.front());
    queue.pop_front();
    for_each_corner_removal(cur, [&](Partition next, std::size_t) {
      if (seen.insert(next).second) queue.push_back(std::move(next));
    });
  }
  std::vector<Partition> out(seen.begin(), seen.end());
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<Partition> lower_set(const Partition& p) { return lower_set(std::span<const Partition>(&p, 1)); }

std::vector<std::pair<Partition, double>> one_step_down(const Partition& p) {
  if (p.empty()) throw std::invalid_argument("one_step_down of the empty partition");
  std::vector<std::pair<Partition, double>> out;
  const double n = p.size();
  std::size_t pos = 0;
  for (const auto& c : size_classes(p)) {
    // The corner of a class sits at its last row.
    std::vector<Part> next = p.parts();
    std::size_t row = pos + c.count - 1;
    if (--next[row] == 0) next.erase(next.begin() + static_cast<std::ptrdiff_t>(row));
    out.emplace_back(Partition::from_sorted(std::move(next)), c.value * static_cast<double>(c.count) / n);
    pos += c.count;
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  return out;
}

namespace {

// Enumerates matching matrices M between the size classes of omega (rows) and gamma
// (columns). M[i][j] counts pairs merging a part s_i with a part r_j.
class MatchingEnumerator {
 public:
  MatchingEnumerator(const Partition& omega, const Partition& gamma)
      : w_(size_classes(omega)), g_(size_classes(gamma)), row_(w_.size(), 0), col_(g_.size(), 0),
        m_(w_.size() * g_.size(), 0) {}

  template <class Leaf>
  void run(Leaf&& leaf) {
    recurse(0, leaf);
  }

  // Parts of the merged partition for the current matrix, non-increasing.
  std::vector<Part> target_parts() const {
    std::vector<Part> parts;
    for (std::size_t i = 0; i < w_.size(); ++i) parts.insert(parts.end(), w_[i].count - row_[i], w_[i].value);
    for (std::size_t j = 0; j < g_.size(); ++j) parts.insert(parts.end(), g_[j].count - col_[j], g_[j].value);
    for (std::size_t i = 0; i < w_.size(); ++i)
      for (std::size_t j = 0; j < g_.size(); ++j)
        parts.insert(parts.end(), m_[i * g_.size() + j], w_[i].value + g_[j].value);
    std::sort(parts.begin(), parts.end(), std::greater<>());
    return parts;
  }

  const std::vector<SizeClass>& rows() const { return w_; }
  const std::vector<SizeClass>& cols() const { return g_; }
  std::uint32_t row_used(std::size_t i) const { return row_[i]; }
  std::uint32_t col_used(std::size_t j) const { return col_[j]; }
  std::uint32_t cell(std::size_t i, std::size_t j) const { return m_[i * g_.size() + j]; }

 private:
  template <class Leaf>
  void recurse(std::size_t idx, Leaf& leaf) {
    if (idx == m_.size()) {
      leaf();
      return;
    }
    std::size_t i = idx / g_.size(), j = idx % g_.size();
    std::uint32_t cap = std::min(w_[i].count - row_[i], g_[j].count - col_[j]);
    for (std::uint32_t v = 0; v <= cap; ++v) {
      m_[idx] = v;
      row_[i] += v;
      col_[j] += v;
      recurse(idx + 1, leaf);
      row_[i] -= v;
      col_[j] -= v;
    }
    m_[idx] = 0;
  }

  std::vector<SizeClass> w_, g_;
  std::vector<std::uint32_t> row_, col_, m_;
};

// Runs of equal values in a non-increasing part list.
template <class F>
void for_each_run(const std::vector<Part>& parts, F&& f) {
  std::size_t i = 0;
  while (i < parts.size()) {
    std::size_t j = i;
    while (j < parts.size() && parts[j] == parts[i]) ++j;
    f(parts[i], static_cast<std::uint32_t>(j - i));
    i = j;
  }
}

}  // namespace

namespace {

std::uint64_t mix(std::uint64_t x) {
  x ^= x >> 33;
  x *= 0xff51afd7ed558ccdULL;
  x ^= x >> 33;
  x *= 0xc4ceb9fe1a85ec53ULL;
  return x ^ (x >> 33);
}

}  // namespace

Partition CountsWeights::partition(Counts counts) {
  std::vector<Part> parts;
  for (std::size_t x = counts.size(); x-- > 1;) parts.insert(parts.end(), counts[x], static_cast<Part>(x));
  return Partition::from_sorted(std::move(parts));
}

std::uint32_t CountsWeights::size(Counts counts) {
  std::uint32_t m = 0;
  for (std::size_t v = 1; v < counts.size(); ++v) m += counts[v] * static_cast<std::uint32_t>(v);
  return m;
}

std::uint64_t CountsWeights::term(std::size_t v, std::uint32_t c) {
  if (!c) return 0;
  while (salt_.size() <= v) salt_.push_back(mix(salt_.size() + 1));
  return mix(salt_[v] + c);
}

void CountsWeights::grow() {
  std::vector<std::uint32_t> table(table_.empty() ? 64 : 2 * table_.size(), 0);
  const std::size_t mask = table.size() - 1;
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    std::size_t pos = entries_[i].hash & mask;
    while (table[pos]) pos = (pos + 1) & mask;
    table[pos] = static_cast<std::uint32_t>(i + 1);
  }
  table_ = std::move(table);
}

void CountsWeights::insert(std::uint64_t hash, Counts counts, double value) {
  std::size_t len = counts.size();
  while (len > 1 && counts[len - 1] == 0) --len;
  counts = counts.first(len);
  if (2 * (entries_.size() + 1) > table_.size()) grow();
  const std::size_t mask = table_.size() - 1;
  std::size_t pos = hash & mask;
  while (std::uint32_t slot = table_[pos]) {
    Entry& e = entries_[slot - 1];
    if (e.hash == hash && e.length == len && std::equal(counts.begin(), counts.end(), pool_.begin() + e.offset)) {
      e.weight += value;
      return;
    }
    pos = (pos + 1) & mask;
  }
  entries_.push_back({hash, static_cast<std::uint32_t>(pool_.size()), static_cast<std::uint32_t>(len), value});
  pool_.insert(pool_.end(), counts.begin(), counts.end());
  table_[pos] = static_cast<std::uint32_t>(entries_.size());
}

void CountsWeights::add(Counts counts, double value) {
  std::uint64_t hash = 0;
  for (std::size_t v = 1; v < counts.size(); ++v) hash += term(v, counts[v]);
  insert(hash, counts, value);
}

void CountsWeights::add_coag(const Partition& omega, const Partition& gamma, double scale) {
  const auto w = size_classes(omega);
  const auto g = size_classes(gamma);
  const std::size_t p = w.size(), q = g.size();
  const std::uint32_t n = omega.size() + gamma.size();
  std::vector<double> lf(n + 1);
  for (std::uint32_t k = 0; k <= n; ++k) lf[k] = log_factorial(k);
  std::vector<double> lb(p * q);
  for (std::size_t i = 0; i < p; ++i)
    for (std::size_t j = 0; j < q; ++j) lb[i * q + j] = log_binomial(w[i].value + g[j].value, w[i].value);

  // Start from no matches: every part of omega and gamma stays unmatched.
  const Part top = (p ? w[0].value : 0) + (q ? g[0].value : 0);
  std::vector<std::uint32_t> hist(top + 1, 0), row_left(p), col_left(q);
  for (std::size_t i = 0; i < p; ++i) hist[w[i].value] += row_left[i] = w[i].count;
  for (std::size_t j = 0; j < q; ++j) hist[g[j].value] += col_left[j] = g[j].count;
  auto term = [&](Part v) { return this->term(v, hist[v]); };
  std::uint64_t hash = 0;
  double lt = std::log(scale) - log_binomial(n, omega.size());
  for (Part v = 1; v <= top; ++v) {
    hash += term(v);
    lt += lf[hist[v]];
  }
  for (std::size_t i = 0; i < p; ++i) lt -= lf[row_left[i]];
  for (std::size_t j = 0; j < q; ++j) lt -= lf[col_left[j]];

  auto shift = [&](Part v, int d) {
    hash -= term(v);
    lt -= lf[hist[v]];
    hist[v] += d;
    hash += term(v);
    lt += lf[hist[v]];
  };
  // Moves the m-th pair into cell (i, j), and back.
  auto match = [&](std::size_t i, std::size_t j, std::uint32_t m) {
    lt += lf[row_left[i]] + lf[col_left[j]] - lf[row_left[i] - 1] - lf[col_left[j] - 1];
    --row_left[i];
    --col_left[j];
    shift(w[i].value, -1);
    shift(g[j].value, -1);
    shift(w[i].value + g[j].value, 1);
    lt += lb[i * q + j] - std::log(static_cast<double>(m));
  };
  auto unmatch = [&](std::size_t i, std::size_t j, std::uint32_t m) {
    lt -= lb[i * q + j] - std::log(static_cast<double>(m));
    shift(w[i].value + g[j].value, -1);
    shift(g[j].value, 1);
    shift(w[i].value, 1);
    ++row_left[i];
    ++col_left[j];
    lt -= lf[row_left[i]] + lf[col_left[j]] - lf[row_left[i] - 1] - lf[col_left[j] - 1];
  };

  auto leaf = [&] { insert(hash, hist, std::exp(lt)); };
  // Column class j, rows from i on: either close the column or put one more
  // of its parts into cell (r, j) for some r >= i.
  auto rec = [&](auto&& self, std::size_t j, std::size_t i) -> void {
    if (j == q) {
      leaf();
      return;
    }
    self(self, j + 1, 0);
    for (std::size_t r = i; r < p; ++r) {
      std::uint32_t m = 0;
      while (row_left[r] > 0 && col_left[j] > 0) {
        match(r, j, ++m);
        self(self, j, r + 1);
      }
      for (; m > 0; --m) unmatch(r, j, m);
    }
  };
  rec(rec, 0, 0);
}

void coag_accumulate(const Partition& omega, const Partition& gamma, double scale, PartitionWeights& acc) {
  CountsWeights coag;
  coag.add_coag(omega, gamma, scale);
  coag.for_each([&](CountsWeights::Counts counts, double w) { acc[CountsWeights::partition(counts)] += w; });
}

std::vector<LogCoagulation> coag_log_coefficients(const Partition& omega, const Partition& gamma) {
  PartitionWeights acc;
  coag_accumulate(omega, gamma, 1.0, acc);
  std::vector<LogCoagulation> out;
  out.reserve(acc.size());
  for (auto& [mu, v] : acc) out.push_back({mu, std::log(v)});
  return out;
}

std::vector<ExactCoagulation> coag_with_coefficients_exact(const Partition& omega, const Partition& gamma) {
  MatchingEnumerator e(omega, gamma);
  const auto& w = e.rows();
  const auto& g = e.cols();
  std::vector<mpz_class> bin(w.size() * g.size());
  for (std::size_t i = 0; i < w.size(); ++i)
    for (std::size_t j = 0; j < g.size(); ++j)
      bin[i * g.size() + j] = binomial_exact(w[i].value + g[j].value, w[i].value);

  std::map<Partition, mpz_class> acc;
  e.run([&] {
    std::vector<Part> parts = e.target_parts();
    mpz_class num = 1, den = 1, pw;
    for_each_run(parts, [&](Part, std::uint32_t c) { num *= factorial_exact(c); });
    for (std::size_t i = 0; i < w.size(); ++i) den *= factorial_exact(w[i].count - e.row_used(i));
    for (std::size_t j = 0; j < g.size(); ++j) den *= factorial_exact(g[j].count - e.col_used(j));
    for (std::size_t i = 0; i < w.size(); ++i)
      for (std::size_t j = 0; j < g.size(); ++j) {
        std::uint32_t m = e.cell(i, j);
        if (!m) continue;
        den *= factorial_exact(m);
        mpz_pow_ui(pw.get_mpz_t(), bin[i * g.size() + j].get_mpz_t(), m);
        num *= pw;
      }
    acc[Partition::from_sorted(std::move(parts))] += num / den;
  });
  mpz_class norm = binomial_exact(omega.size() + gamma.size(), omega.size());
  std::vector<ExactCoagulation> out;
  out.reserve(acc.size());
  for (auto& [mu, v] : acc) {
    mpq_class q(v, norm);
    q.canonicalize();
    out.push_back({mu, q});
  }
  return out;
}

std::vector<Coagulation> coag_with_coefficients(const Partition& omega, const Partition& gamma,
                                                const CoagulationOptions& options) {
  std::vector<Coagulation> out;
  if (omega.size() + gamma.size() <= options.exact_threshold) {
    for (auto& c : coag_with_coefficients_exact(omega, gamma)) out.push_back({c.target, c.coefficient.get_d()});
  } else {
    for (auto& c : coag_log_coefficients(omega, gamma)) out.push_back({c.target, std::exp(c.log_coefficient)});
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.target < b.target; });
  }
  return out;
}

namespace {

// Enumerates N[i][j]: number of parts of lambda in class i that subsample to
// the omega value r_j. Every omega part is placed exactly once.
template <class Leaf>
void enumerate_marginal(const std::vector<SizeClass>& lam, const std::vector<SizeClass>& om, Leaf&& leaf) {
  const std::size_t p = lam.size(), q = om.size();
  std::vector<std::uint32_t> row(p, 0), n(p * q, 0);
  std::function<void(std::size_t, std::size_t, std::uint32_t)> rec = [&](std::size_t j, std::size_t i,
                                                                         std::uint32_t left) {
    if (j == q) {
      leaf(row, n);
      return;
    }
    if (i == p) {
      if (left == 0) rec(j + 1, 0, j + 1 < q ? om[j + 1].count : 0);
      return;
    }
    std::uint32_t cap = lam[i].value >= om[j].value ? std::min(left, lam[i].count - row[i]) : 0;
    for (std::uint32_t v = 0; v <= cap; ++v) {
      n[i * q + j] = v;
      row[i] += v;
      rec(j, i + 1, left - v);
      row[i] -= v;
    }
    n[i * q + j] = 0;
  };
  if (q == 0) {
    leaf(row, n);
    return;
  }
  rec(0, 0, om[0].count);
}

}  // namespace

double coag_marginal_coefficient(const Partition& omega, const Partition& lambda) {
  if (omega.size() > lambda.size() || !precedes(omega, lambda)) return 0.0;
  const auto lam = size_classes(lambda);
  const auto om = size_classes(omega);
  const double norm = log_binomial(lambda.size(), omega.size());
  double total = 0.0;
  enumerate_marginal(lam, om, [&](const std::vector<std::uint32_t>& row, const std::vector<std::uint32_t>& n) {
    double lt = -norm;
    for (std::size_t i = 0; i < lam.size(); ++i) {
      lt += log_factorial(lam[i].count) - log_factorial(lam[i].count - row[i]);
      for (std::size_t j = 0; j < om.size(); ++j) {
        std::uint32_t v = n[i * om.size() + j];
        if (v) lt += v * log_binomial(lam[i].value, om[j].value) - log_factorial(v);
      }
    }
    total += std::exp(lt);
  });
  return total;
}

mpq_class coag_marginal_coefficient_exact(const Partition& omega, const Partition& lambda) {
  if (omega.size() > lambda.size() || !precedes(omega, lambda)) return 0;
  const auto lam = size_classes(lambda);
  const auto om = size_classes(omega);
  mpz_class total = 0;
  enumerate_marginal(lam, om, [&](const std::vector<std::uint32_t>& row, const std::vector<std::uint32_t>& n) {
    mpz_class num = 1, den = 1, pw;
    for (std::size_t i = 0; i < lam.size(); ++i) {
      num *= factorial_exact(lam[i].count);
      den *= factorial_exact(lam[i].count - row[i]);
      for (std::size_t j = 0; j < om.size(); ++j) {
        std::uint32_t v = n[i * om.size() + j];
        if (!v) continue;
        den *= factorial_exact(v);
        mpz_class b = binomial_exact(lam[i].value, om[j].value);
        mpz_pow_ui(pw.get_mpz_t(), b.get_mpz_t(), v);
        num *= pw;
      }
    }
    total += num / den;
  });
  mpq_class q(total, binomial_exact(lambda.size(), omega.size()));
  q.canonicalize();
  return q;
}

double coag_enumeration_size(const Partition& omega, const Partition& gamma, double limit) {
  const auto rows = size_classes(omega);
  const auto cols = size_classes(gamma);
  // State: remaining multiplicity of each column class.
  std::map<std::vector<std::uint32_t>, double> states;
  std::vector<std::uint32_t> start;
  for (auto& c : cols) start.push_back(c.count);
  states[start] = 1.0;
  double total = 1.0;
  for (const auto& r : rows) {
    std::map<std::vector<std::uint32_t>, double> next;
    for (const auto& [rem, count] : states) {
      std::vector<std::uint32_t> cur = rem;
      // Every way of giving at most r.count matches of this row class to the columns.
      auto rec = [&](auto&& self, std::size_t j, std::uint32_t left) -> void {
        if (j == cur.size()) {
          next[cur] += count;
          return;
        }
        const std::uint32_t top = std::min(left, rem[j]);
        for (std::uint32_t x = 0; x <= top; ++x) {
          cur[j] = rem[j] - x;
          self(self, j + 1, left - x);
        }
        cur[j] = rem[j];
      };
      rec(rec, 0, r.count);
    }
    states = std::move(next);
    total = 0.0;
    for (auto& [rem, count] : states) total += count;
    if (total > limit) return total;
  }
  return total;
}

double sub_partition_work(const Partition& lambda) {
  double w = 1.0;
  for (const auto& c : size_classes(lambda)) w *= std::exp(log_binomial(c.value + c.count, c.count));
  return w;
}

CountsWeights sub_partition_counts(const Partition& lambda) {
  struct Option {
    std::vector<std::pair<Part, std::uint32_t>> counts;  // subsample size and multiplicity, non-zero sizes only
    double weight;
  };
  // Per size class: multisets of subsample sizes in [0, s] of length a.
  std::vector<std::vector<Option>> per_class;
  for (const auto& c : size_classes(lambda)) {
    std::vector<Option> opts;
    std::vector<std::uint32_t> counts(c.value + 1, 0);
    auto rec = [&](auto&& self, Part v, std::uint32_t left) -> void {
      if (v == 0) {
        Option o;
        double lw = log_factorial(c.count) - log_factorial(left);
        for (Part u = c.value; u >= 1; --u) {
          if (!counts[u]) continue;
          o.counts.push_back({u, counts[u]});
          lw += counts[u] * log_binomial(c.value, u) - log_factorial(counts[u]);
        }
        o.weight = std::exp(lw);
        opts.push_back(std::move(o));
        return;
      }
      for (std::uint32_t k = 0; k <= left; ++k) {
        counts[v] = k;
        self(self, v - 1, left - k);
      }
      counts[v] = 0;
    };
    rec(rec, c.value, c.count);
    per_class.push_back(std::move(opts));
  }

  // Class by class, merging partial subsamples that agree so far.
  CountsWeights acc;
  std::vector<std::uint32_t> scratch(lambda.empty() ? 1 : lambda[0] + 1, 0);
  acc.add(scratch, 1.0);
  for (const auto& opts : per_class) {
    CountsWeights next;
    acc.for_each_hashed([&](std::uint64_t hash, CountsWeights::Counts head, double w) {
      std::fill(scratch.begin(), scratch.end(), 0);
      std::copy(head.begin(), head.end(), scratch.begin());
      for (const auto& o : opts) {
        std::uint64_t h = hash;
        for (auto [u, k] : o.counts) {
          h -= next.hash_term(u, scratch[u]);
          scratch[u] += k;
          h += next.hash_term(u, scratch[u]);
        }
        next.add(h, scratch, w * o.weight);
        for (auto [u, k] : o.counts) scratch[u] -= k;
      }
    });
    acc = std::move(next);
  }
  acc.for_each(
      [&](CountsWeights::Counts mu, double& w) { w /= std::exp(log_binomial(lambda.size(), CountsWeights::size(mu))); });
  return acc;
}

PartitionWeights sub_partition_weights(const Partition& lambda) {
  PartitionWeights out;
  sub_partition_counts(lambda).for_each(
      [&](CountsWeights::Counts mu, double w) { out.emplace(CountsWeights::partition(mu), w); });
  return out;
}

std::vector<std::pair<Partition, double>> sub_partitions(const Partition& lambda) {
  PartitionWeights acc = sub_partition_weights(lambda);
  std::vector<std::pair<Partition, double>> out(acc.begin(), acc.end());
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  return out;
}

}  // namespace pdhmm
