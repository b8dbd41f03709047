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

#include "fedcert/common.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

namespace fedcert {

BudgetExceeded::BudgetExceeded(std::size_t client_id, std::size_t max_queries)
    : std::runtime_error("query budget exhausted for client " + std::to_string(client_id) +
                         " (max " + std::to_string(max_queries) + " queries)"),
      client_id_(client_id) {}

void parallel_for(std::size_t n, unsigned jobs, const std::function<void(std::size_t)>& fn) {
  if (jobs <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  const unsigned count = std::min<std::size_t>(jobs, n);
  pool.reserve(count);
  for (unsigned t = 0; t < count; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

std::string to_string(DivergenceKind kind) {
  return kind == DivergenceKind::kKL ? "kl" : "chi-square";
}

std::string to_string(CostKind kind) {
  return kind == CostKind::kHalfSquaredL2 ? "half-squared-L2" : "L2";
}

DivergenceKind parse_divergence_kind(const std::string& name) {
  if (name == "kl" || name == "KL") return DivergenceKind::kKL;
  if (name == "chi-square" || name == "chi2") return DivergenceKind::kChiSquare;
  throw std::invalid_argument("unknown divergence: " + name);
}

CostKind parse_cost_kind(const std::string& name) {
  if (name == "half-squared-L2") return CostKind::kHalfSquaredL2;
  if (name == "L2") return CostKind::kL2;
  throw std::invalid_argument("unknown transport cost: " + name);
}

double cost_of_distance(CostKind kind, double r) {
  return kind == CostKind::kHalfSquaredL2 ? 0.5 * r * r : r;
}

double dot(const Vec& a, const Vec& b) {
  if (a.size() != b.size()) throw std::invalid_argument("dot: dimension mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double squared_norm(const Vec& a) {
  double s = 0.0;
  for (double v : a) s += v * v;
  return s;
}

bool all_finite(const Vec& v) {
  for (double x : v)
    if (!std::isfinite(x)) return false;
  return true;
}

}  // namespace fedcert
