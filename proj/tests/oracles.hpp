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

// Brute-force reference computations used only by the tests. Each works
// from first principles (labelled enumeration) and shares no code with the
// library routines it checks.

#include <algorithm>
#include <cstdint>
#include <functional>
#include <map>
#include <vector>

#include <gmpxx.h>

#include "pdhmm/partition.hpp"

namespace oracle {

using pdhmm::Part;
using pdhmm::Partition;

inline mpz_class binom(unsigned n, unsigned k) {
  if (k > n) return 0;
  mpz_class r = 1;
  for (unsigned i = 0; i < k; ++i) {
    r *= n - i;
    r /= i + 1;
  }
  return r;
}

inline Partition nonzero(const std::vector<Part>& v) {
  std::vector<Part> out;
  for (Part x : v)
    if (x) out.push_back(x);
  return Partition(out);
}

// Calls f(z) for every vector z with 0 <= z_j <= mu_j.
inline void for_each_subvector(const Partition& mu, const std::function<void(const std::vector<Part>&)>& f) {
  std::vector<Part> z(mu.length(), 0);
  std::function<void(std::size_t)> rec = [&](std::size_t j) {
    if (j == mu.length()) {
      f(z);
      return;
    }
    for (Part v = 0; v <= mu[j]; ++v) {
      z[j] = v;
      rec(j + 1);
    }
  };
  rec(0);
}

// H(omega, gamma | mu) by splitting the squares of each part of mu positionally.
inline mpq_class pair_coefficient(const Partition& omega, const Partition& gamma, const Partition& mu) {
  if (omega.size() + gamma.size() != mu.size()) return 0;
  mpz_class total = 0;
  for_each_subvector(mu, [&](const std::vector<Part>& z) {
    std::vector<Part> y(z.size());
    unsigned s = 0;
    for (std::size_t j = 0; j < z.size(); ++j) {
      y[j] = mu[j] - z[j];
      s += z[j];
    }
    if (s != omega.size()) return;
    if (nonzero(z) == omega && nonzero(y) == gamma) {
      mpz_class w = 1;
      for (std::size_t j = 0; j < z.size(); ++j) w *= binom(mu[j], z[j]);
      total += w;
    }
  });
  mpq_class q(total, binom(mu.size(), omega.size()));
  q.canonicalize();
  return q;
}

// H(omega | lambda) by positional subsampling.
inline mpq_class marginal_coefficient(const Partition& omega, const Partition& lambda) {
  mpz_class total = 0;
  for_each_subvector(lambda, [&](const std::vector<Part>& z) {
    if (nonzero(z) == omega) {
      mpz_class w = 1;
      for (std::size_t j = 0; j < z.size(); ++j) w *= binom(lambda[j], z[j]);
      total += w;
    }
  });
  mpq_class q(total, binom(lambda.size(), omega.size()));
  q.canonicalize();
  return q;
}

// Block-size partition of every set partition of {0..n-1}, counted.
inline std::map<Partition, unsigned long> set_partition_counts(unsigned n) {
  std::map<Partition, unsigned long> out;
  std::vector<unsigned> label(n, 0);
  std::function<void(unsigned, unsigned)> rec = [&](unsigned i, unsigned blocks) {
    if (i == n) {
      std::vector<Part> sizes(blocks, 0);
      for (unsigned v : label) ++sizes[v];
      ++out[Partition(sizes)];
      return;
    }
    for (unsigned b = 0; b <= blocks; ++b) {
      label[i] = b;
      rec(i + 1, std::max(blocks, b + 1));
    }
  };
  rec(0, 0);
  return out;
}

// P(pi | x) by summing over ordered distinct atom indices; pi has at most three parts.
inline double likelihood(const Partition& pi, const std::vector<double>& x) {
  const std::size_t k = x.size();
  double s = 0.0;
  if (pi.length() == 0) return 1.0;
  auto pw = [](double v, Part e) {
    double r = 1.0;
    for (Part i = 0; i < e; ++i) r *= v;
    return r;
  };
  if (pi.length() == 1) {
    for (std::size_t i = 0; i < k; ++i) s += pw(x[i], pi[0]);
  } else if (pi.length() == 2) {
    for (std::size_t i = 0; i < k; ++i)
      for (std::size_t j = 0; j < k; ++j)
        if (i != j) s += pw(x[i], pi[0]) * pw(x[j], pi[1]);
  } else {
    for (std::size_t i = 0; i < k; ++i)
      for (std::size_t j = 0; j < k; ++j)
        for (std::size_t l = 0; l < k; ++l)
          if (i != j && j != l && i != l) s += pw(x[i], pi[0]) * pw(x[j], pi[1]) * pw(x[l], pi[2]);
  }
  return s * pdhmm::combinatorial_coefficient(pi).get_d();
}

// Law of the partition formed by m customers arriving after tables of sizes
// lambda, by enumerating every seating sequence.
inline std::map<Partition, double> seating_law(const Partition& lambda, unsigned m, double alpha, double theta) {
  std::map<Partition, double> out;
  std::vector<double> tables(lambda.begin(), lambda.end());
  std::vector<Part> fresh(tables.size(), 0);
  double seated = lambda.size();
  std::function<void(unsigned, double)> rec = [&](unsigned left, double prob) {
    if (left == 0) {
      out[nonzero(fresh)] += prob;
      return;
    }
    double denom = theta + seated;
    std::size_t k = tables.size();
    for (std::size_t j = 0; j < k; ++j) {
      double p = seated == 0 ? 0.0 : (tables[j] - alpha) / denom;
      if (p <= 0) continue;
      tables[j] += 1;
      fresh[j] += 1;
      seated += 1;
      rec(left - 1, prob * p);
      seated -= 1;
      fresh[j] -= 1;
      tables[j] -= 1;
    }
    double p_new = seated == 0 ? 1.0 : (theta + alpha * k) / denom;
    tables.push_back(1);
    fresh.push_back(1);
    seated += 1;
    rec(left - 1, prob * p_new);
    seated -= 1;
    fresh.pop_back();
    tables.pop_back();
  };
  rec(m, 1.0);
  return out;
}

}  // namespace oracle
