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

#include <cstdint>
#include <random>
#include <span>

namespace pdhmm {

// Deterministic random source. Stream k of seed s is seeded from the
// sequence {s_lo, s_hi, k_lo, k_hi}; distinct (seed, stream) pairs give
// independent engines, so work split across streams is reproducible.
class Rng {
 public:
  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0);

  Rng split(std::uint64_t stream) const { return Rng(seed_, stream_ * 0x9E3779B97F4A7C15ULL + stream + 1); }
  std::uint64_t seed() const { return seed_; }

  std::mt19937_64& engine() { return engine_; }

  double uniform();                  // (0, 1)
  double exponential(double rate);
  double gamma(double shape);        // unit scale
  double beta(double a, double b);
  std::uint64_t uniform_int(std::uint64_t n);  // [0, n)
  // Index drawn from a non-decreasing cumulative weight vector.
  std::size_t categorical_cumulative(std::span<const double> cumulative);

 private:
  std::uint64_t seed_, stream_;
  std::mt19937_64 engine_;
};

}  // namespace pdhmm
