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

#include <cmath>
#include <utility>
#include <vector>

#include "fedcert/bound.hpp"
#include "fedcert/client_query.hpp"

namespace fedcert {

/// How a sampled QV(rho) curve is turned into a concave majorant.
///  kSampleHull: concave hull of the sampled points. Dominates the samples,
///    not necessarily QV between them.
///  kSoundOuter: additionally uses the concavity of QV in rho, extending the
///    neighbouring chords across each grid cell, so the envelope dominates
///    QV on the whole grid range. An extra query at rho = 0 anchors the first
///    cell.
enum class EnvelopeMode { kSampleHull, kSoundOuter };

/// Upper concave hull vertices of the points (x_i, y_i), x sorted ascending.
std::pair<Vec, Vec> concave_majorant(const Vec& x, const Vec& y);

struct QvProfile {
  std::size_t client = 0;
  Vec rho;         // queried radii, ascending
  Vec value;       // queried values, running maximum applied
  Vec env_rho;     // envelope vertices
  Vec env_value;
  SolverStatus status = SolverStatus::kExact;

  /// Envelope value, held constant outside the vertex range.
  double envelope(double r) const;
};

QvProfile make_profile(std::size_t client, Vec rho, Vec value, EnvelopeMode mode);

struct WassParams {
  double c1 = 1.0 / std::sqrt(2.0);
  double c2 = 1.0;
  SlackMode slack = SlackMode::kFull;
  std::size_t grid_size = 16;
  double Delta = 1e-3;
  EnvelopeMode envelope = EnvelopeMode::kSoundOuter;
  unsigned jobs = 1;
};

/// Per-client floor rho_k >= floor and mean(rho) <= mean_cap.
struct RadiusBudget {
  double floor = 0.0;
  double mean_cap = 0.0;
};

RadiusBudget radius_budget(std::size_t K, double epsilon, double delta, const WassParams& params);

/// Radii at which every client is queried.
Vec radius_grid(std::size_t K, const RadiusBudget& budget, const WassParams& params);

/// Queries every client on the radius grid. BudgetExceeded propagates with
/// the offending client's id.
std::vector<QvProfile> build_profiles(Network& network, const Hypothesis& h, const LossFn& loss_fn,
                                      double epsilon, double delta, const WassParams& params = {});

struct RadiusAllocation {
  Vec rho;
  double mean_rho = 0.0;
  Vec qv_at_rho;
  double objective = 0.0;   // mean of the envelopes at rho

  nlohmann::json to_json() const;
};

/// Maximizes mean envelope_k(rho_k) under the radius budget by water-filling.
RadiusAllocation max_allocation(const std::vector<QvProfile>& profiles, const RadiusBudget& budget);

struct FeasibilityResult {
  bool feasible = false;
  RadiusAllocation witness;
};

FeasibilityResult feasibility_check(double t, const std::vector<QvProfile>& profiles, double epsilon,
                                    double delta, const WassParams& params = {});

struct BisectionStep {
  double a = 0.0, b = 1.0, t = 0.5;
  bool feasible = false;
};

struct BisectionTrace {
  double Delta = 1e-3;
  std::vector<BisectionStep> steps;

  nlohmann::json to_json() const;
};

struct BisectionResult {
  double value = 1.0;
  BisectionTrace trace;
  RadiusAllocation witness;
};

/// Bisection on the certificate level t in [0, 1]; returns the upper end.
BisectionResult bisection_certificate(const std::vector<QvProfile>& profiles, double epsilon,
                                      double delta, const WassParams& params = {});

/// Certificate from already-built profiles.
CertifiedBound wass_mean_bound(const std::vector<QvProfile>& profiles,
                               const std::vector<std::size_t>& n, double epsilon, double delta,
                               const WassParams& params = {});

CertifiedBound wass_mean_bound(Network& network, const Hypothesis& h, const LossFn& loss_fn,
                               double epsilon, double delta, const WassParams& params = {});

}  // namespace fedcert
