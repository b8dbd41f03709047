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

#include <cstddef>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace fedcert {

using Vec = std::vector<double>;
using Mat = std::vector<Vec>;

/// Thrown when a client refuses a query because its budget is spent.
class BudgetExceeded : public std::runtime_error {
 public:
  BudgetExceeded(std::size_t client_id, std::size_t max_queries);
  std::size_t client_id() const noexcept { return client_id_; }

 private:
  std::size_t client_id_;
};

/// Thrown when a gradient is requested for a non-differentiable loss.
class UnsupportedGradient : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Runs fn(i) for i in [0, n) on up to `jobs` threads. Each index runs exactly
/// once; the caller owns any synchronization of shared results.
void parallel_for(std::size_t n, unsigned jobs, const std::function<void(std::size_t)>& fn);

/// f-divergences with validated constants.
enum class DivergenceKind { kKL, kChiSquare };

/// Feature transport cost; a label change always costs +infinity.
enum class CostKind { kHalfSquaredL2, kL2 };

std::string to_string(DivergenceKind kind);
std::string to_string(CostKind kind);
DivergenceKind parse_divergence_kind(const std::string& name);
CostKind parse_cost_kind(const std::string& name);

/// Cost of moving a feature vector by Euclidean distance r.
double cost_of_distance(CostKind kind, double r);

double dot(const Vec& a, const Vec& b);
double squared_norm(const Vec& a);
bool all_finite(const Vec& v);

}  // namespace fedcert
