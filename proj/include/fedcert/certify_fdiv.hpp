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

#include <string>
#include <vector>

#include "fedcert/bound.hpp"

namespace fedcert {

/// Generator f of an f-divergence, f(0) taken as its right limit.
double divergence_generator(DivergenceKind kind, double t);

/// An f-divergence with the constants of an epsilon-ball at confidence delta:
/// the weight cap Lambda = max{t >= 1 : f(t) <= epsilon/delta} and the
/// concentration constants c1 (mean band) and c2 (mean-f budget).
struct DivergenceSpec {
  DivergenceKind kind = DivergenceKind::kKL;
  double epsilon = 0.0;
  double delta = 0.5;
  double cap = 1.0;
  double c1 = 0.0;
  double c2 = 0.0;

  double f(double t) const { return divergence_generator(kind, t); }
  double f_prime(double t) const;
  /// argmax over a in [0, cap] of a * slope - eta * f(a), for eta > 0.
  double best_weight(double slope, double eta) const;
  nlohmann::json to_json() const;
};

DivergenceSpec make_divergence(DivergenceKind kind, double epsilon, double delta);

struct ReweightSolution {
  Vec alpha;
  double objective = 0.0;   // mean(alpha * q)
  double dual_value = 0.0;  // upper bound on the optimum from (tau, eta)
  double tau = 0.0;         // multiplier of the mean band
  double eta = 0.0;         // multiplier of the mean-f budget
  double mean_alpha = 1.0;
  double mean_f = 0.0;
  std::string status = "optimal";
};

/// max mean(alpha * q) over alpha in [0, cap]^K with |mean(alpha) - 1| <= band
/// and mean f(alpha) <= eps_budget.
ReweightSolution solve_reweight(const Vec& q, const DivergenceSpec& spec, double eps_budget,
                                double band);

struct FdivOptions {
  SlackMode slack = SlackMode::kFull;
  /// Constant multiplying sqrt(ln(K/delta)/K) in the CDF padding.
  double cdf_constant = 1.0;
  bool include_alpha = false;
  unsigned jobs = 1;
};

CertifiedBound fdiv_mean_bound(const Vec& qv, const std::vector<std::size_t>& n, double delta,
                               double epsilon, DivergenceKind kind, const FdivOptions& options = {});

CdfCurve fdiv_cdf_bound(const Vec& qv, const std::vector<std::size_t>& n, double delta,
                        double epsilon, DivergenceKind kind, const Vec& lambda_grid,
                        const FdivOptions& options = {});

}  // namespace fedcert
