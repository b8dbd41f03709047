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
#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

#include "fedcert/bound.hpp"
#include "fedcert/certify_fdiv.hpp"
#include "fedcert/certify_wass.hpp"
#include "fedcert/client_query.hpp"
#include "fedcert/losses.hpp"
#include "fedcert/meta_sim.hpp"

namespace fedcert {

// Brute-force reference solvers. They share no numerical code with the
// certification modules.

/// Best objective of the reweighting program over the grid {0, step, 2 step,
/// ...} intersected with [0, cap]^K. K <= 3.
double grid_reweight_oracle(const Vec& q, const DivergenceSpec& spec, double eps_budget, double band,
                            double step);

/// sup of the mean loss over transport plans from n equally weighted samples
/// to m support points with average cost <= rho. losses[i][j] is the loss of
/// sample i moved to point j; an infinite cost forbids that move.
double wass_ball_lp_oracle(const Mat& losses, const Mat& costs, double rho);

/// Max over a regular grid of radii (spacing = total budget / steps) of the
/// mean of qv_k(rho_k), subject to rho_k >= floor and mean(rho) <= mean_cap.
/// K <= 3.
double grid_allocation_oracle(const std::vector<std::function<double(double)>>& qv, double floor,
                              double mean_cap, std::size_t steps);

/// Expected loss of h on client `spec`. Closed form for zero-one loss of a
/// linear or logistic two-class model; otherwise a Monte-Carlo average over
/// `mc_samples` fresh draws.
double client_risk(const MetaConfig& cfg, const ClientSpec& spec, const Hypothesis& h,
                   const LossFn& loss_fn, std::size_t mc_samples = 20000);
bool has_closed_form_risk(const MetaConfig& cfg, const Hypothesis& h, const LossFn& loss_fn);

/// Risks of `count` clients drawn from cfg (clients indexed 0..count-1).
Vec network_risks(const MetaConfig& cfg, std::size_t count, const Hypothesis& h, const LossFn& loss_fn,
                  std::size_t mc_samples = 20000, unsigned jobs = 1);

/// Fraction of values >= lambda.
double survival(const Vec& values, double lambda);

/// How the target network departs from the source meta-distribution.
enum class ShiftKind { kNone, kFdiv, kWass };
std::string to_string(ShiftKind kind);
ShiftKind parse_shift_kind(const std::string& name);

struct TargetShift {
  ShiftKind kind = ShiftKind::kNone;
  /// Divergence or transport cost of the attack; negative means "the bound's
  /// epsilon".
  double amount = -1.0;
  Mat directions;   // per-class move directions for kWass
  CostKind cost = CostKind::kHalfSquaredL2;
};

struct BoundRequest {
  std::string name = "bound";
  BoundKind kind = BoundKind::kMean;
  double delta = 0.1;
  double epsilon = 0.0;
  DivergenceKind divergence = DivergenceKind::kKL;
  Vec lambda_grid;
  FdivOptions fdiv;
  WassParams wass;

  bool is_curve() const { return kind == BoundKind::kCdfCurve || kind == BoundKind::kFdivCdf; }
  nlohmann::json to_json() const;
};

/// Computes one requested bound from a network.
struct BoundResult {
  CertifiedBound mean;   // set for mean kinds
  CdfCurve curve;        // set for curve kinds
  double headline = 0.0; // mean bound value, or the curve's value at its first grid point
};
BoundResult compute_bound(Network& network, const Hypothesis& h, const LossFn& loss_fn,
                          const BoundRequest& request);

struct CoverageSpec {
  MetaConfig world;
  Hypothesis model;
  LossFn loss;
  BoundRequest bound;
  TargetShift shift;
  std::size_t clients = 100;
  std::size_t samples = 100;
  std::size_t target_clients = 1000;
  std::size_t trials = 100;
  std::size_t max_queries = 64;
  CostKind query_cost = CostKind::kHalfSquaredL2;
  std::size_t risk_samples = 20000;
  std::uint64_t seed = 0;
  unsigned jobs = 1;
};

/// The shifted meta-distribution a coverage run targets, with the achieved
/// divergence or transport cost. Throws on a bound/shift mismatch or a shift
/// larger than the certified budget.
struct ResolvedShift {
  MetaConfig config;
  double achieved = 0.0;
  bool within_budget = true;
};
ResolvedShift resolve_shift(const MetaConfig& world, const BoundRequest& bound, const TargetShift& shift);

struct CoverageReport {
  std::string name;
  BoundKind kind = BoundKind::kMean;
  std::size_t trials = 0;
  std::size_t violations = 0;   // uniform over lambda for curve kinds
  double violation_rate = 0.0;
  double delta = 0.1;
  double threshold = 0.0;       // delta + 3 sqrt(delta (1 - delta) / trials)
  std::string world_digest;
  double achieved_shift = 0.0;
  Vec lambda;
  std::vector<std::size_t> lambda_violations;
  double max_lambda_rate = 0.0;
  double mean_bound = 0.0;
  double mean_target = 0.0;

  bool passes() const;
  nlohmann::json to_json() const;
  std::string to_csv() const;
};

CoverageReport coverage_experiment(const CoverageSpec& spec);

struct TightnessRow {
  std::size_t K = 0, n = 0, trials = 0;
  double median_gap = 0.0;
  double se = 0.0;
  double mean_bound = 0.0;
  double mean_target = 0.0;
  double slack = 0.0;
};

struct TightnessReport {
  std::vector<TightnessRow> rows;
  bool strictly_decreasing = false;
  bool decreasing_within_noise = false;

  nlohmann::json to_json() const;
  std::string to_csv() const;
};

/// Median gap between a mean bound and the target mean under the configured
/// shift, for each (K, n) pair. Mean bound kinds only.
TightnessReport tightness_probe(const CoverageSpec& base, const std::vector<std::size_t>& K_schedule,
                                const std::vector<std::size_t>& n_schedule);

/// Short stable digest of a JSON document.
std::string json_digest(const nlohmann::json& j);

}  // namespace fedcert
