// Copyright 2026 The fedcert Authors
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

#include "fedcert/common.hpp"

namespace fedcert {

/// SplitMix64 finalizer; used to derive independent stream seeds.
std::uint64_t splitmix64(std::uint64_t x);

/// Seed for stream `stream` of entity `index` under a world seed. Streams keep
/// client parameters, client data and evaluation draws independent.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream, std::uint64_t index);

namespace stream {
inline constexpr std::uint64_t kClientSpec = 1;
inline constexpr std::uint64_t kClientData = 2;
inline constexpr std::uint64_t kRiskEval = 3;
inline constexpr std::uint64_t kTrial = 4;
inline constexpr std::uint64_t kInnerSolver = 5;
inline constexpr std::uint64_t kTarget = 6;
}  // namespace stream

/// Portable random source. The engine is std::mt19937_64, whose output sequence
/// is fixed by the standard; the variate transforms below are implemented here
/// so that draws are identical across standard library implementations.
class Rng {
 public:
  static constexpr const char* kName = "mt19937_64+splitmix64/v1";

  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }
  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Standard normal (Box-Muller).
  double normal();
  double normal(double mean, double stddev) { return mean + stddev * normal(); }
  /// Gamma(shape, 1) via Marsaglia-Tsang.
  double gamma(double shape);
  Vec dirichlet(double alpha, std::size_t n);
  std::size_t categorical(std::span<const double> probs);

 private:
  std::mt19937_64 engine_;
  double cached_normal_ = 0.0;
  bool has_cached_ = false;
};

}  // namespace fedcert
