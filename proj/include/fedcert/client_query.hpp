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
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "fedcert/common.hpp"
#include "fedcert/losses.hpp"
#include "fedcert/meta_sim.hpp"

namespace fedcert {

/// c(z', z): a feature cost plus an infinite charge for changing the label.
struct TransportCost {
  CostKind kind = CostKind::kHalfSquaredL2;

  double operator()(const Sample& moved, const Sample& original) const;
  double features(const Vec& moved, const Vec& original) const;
};

enum class SolverStatus { kExact, kConverged, kNotConverged };
std::string to_string(SolverStatus status);

struct QueryValue {
  double value = 0.0;
  double rho = 0.0;
  double gamma_star = 0.0;
  std::size_t inner_iterations = 0;
  SolverStatus status = SolverStatus::kExact;
};

struct QueryBudget {
  std::size_t max_queries = 0;
  std::size_t used = 0;

  bool exhausted() const { return used >= max_queries; }
};

struct InnerSolverOptions {
  int steps = 100;
  int restarts = 3;
  double golden_tolerance = 1e-6;
  int golden_max_iterations = 200;
  std::uint64_t seed = 0;
};

struct PhiValue {
  double value = 0.0;
  std::size_t iterations = 0;
  SolverStatus status = SolverStatus::kExact;
};

/// Mean loss over the dataset.
QueryValue empirical_risk(const Hypothesis& h, const LocalDataset& data, const LossFn& loss_fn);

/// phi_gamma(z) = sup over z' of loss(z') - gamma * c(z', z). Solved exactly
/// when the supremum reduces to finitely many candidates (lookup tables, and
/// zero-one loss on linear or logistic models); otherwise by gradient ascent
/// on the features with restarts, returning the best value found.
PhiValue phi_gamma(const Hypothesis& h, double gamma, const Sample& z, const TransportCost& cost,
                   const LossFn& loss_fn, const InnerSolverOptions& options = {});

/// Worst-case mean loss over datasets within average transport cost rho,
/// through its dual min over gamma in [0, 1/rho] of gamma*rho + mean phi_gamma.
QueryValue adversarial_risk(const Hypothesis& h, const LocalDataset& data, double rho,
                            const TransportCost& cost, const LossFn& loss_fn,
                            const InnerSolverOptions& options = {});

/// One client: owns its private dataset and answers scalar queries only.
class Client {
 public:
  Client(LocalDataset data, std::size_t max_queries, TransportCost cost = {},
         InnerSolverOptions options = {});

  QueryValue query(const Hypothesis& h, const LossFn& loss_fn, double rho);

  std::size_t id() const { return id_; }
  std::size_t sample_count() const { return n_; }
  QueryBudget budget() const;

 private:
  LocalDataset data_;
  std::size_t id_;
  std::size_t n_;
  TransportCost cost_;
  InnerSolverOptions options_;
  mutable std::mutex mutex_;
  QueryBudget budget_;
};

struct QueryLogEntry {
  std::size_t client = 0;
  QueryValue result;
};

/// The server's view of the federation: K clients reachable by index. Sample
/// counts are public; datasets are not.
class Network {
 public:
  Network(std::vector<LocalDataset> datasets, std::size_t max_queries, TransportCost cost = {},
          InnerSolverOptions options = {});

  std::size_t size() const { return clients_.size(); }
  std::vector<std::size_t> sample_counts() const;
  const TransportCost& cost() const { return cost_; }

  /// Thread-safe across clients; throws BudgetExceeded when client k is spent.
  QueryValue query(std::size_t k, const Hypothesis& h, const LossFn& loss_fn, double rho);
  /// Ordinary risks of every client, one query each.
  Vec query_all(const Hypothesis& h, const LossFn& loss_fn, unsigned jobs = 1);

  /// JSON-lines audit log, ordered by client then by query order.
  void write_log(const std::filesystem::path& path) const;

 private:
  std::vector<std::unique_ptr<Client>> clients_;
  TransportCost cost_;
  mutable std::mutex log_mutex_;
  std::vector<std::vector<QueryValue>> log_;
};

}  // namespace fedcert
