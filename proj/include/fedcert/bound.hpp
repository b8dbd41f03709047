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

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "fedcert/common.hpp"

namespace fedcert {

enum class BoundKind { kMean, kCdfCurve, kFdivMean, kFdivCdf, kWassMean };
std::string to_string(BoundKind kind);
BoundKind parse_bound_kind(const std::string& name);

/// kZero drops every additive slack and every concentration widening of the
/// constraint sets, leaving only the optimization programs. Used to check the
/// programs against hand-solved instances; never a valid certificate.
enum class SlackMode { kFull, kZero };

using SlackTerms = std::vector<std::pair<std::string, double>>;

struct CertifiedBound {
  BoundKind kind = BoundKind::kMean;
  double value = 0.0;       // min(raw_value, 1)
  double raw_value = 0.0;   // program value plus slack
  double program_value = 0.0;
  SlackTerms slack;
  std::string status = "optimal";
  nlohmann::json params = nlohmann::json::object();
  nlohmann::json details = nlohmann::json::object();

  double slack_total() const;
  nlohmann::json to_json() const;
};

/// Upper bound on the survival function lambda -> P(R >= lambda), stored on a
/// grid that contains every jump so it is exact between grid points.
struct CdfCurve {
  BoundKind kind = BoundKind::kCdfCurve;
  Vec lambda;
  Vec bound;
  Vec program;   // the bound before padding and clipping
  double tail = 0.0;   // bound beyond the last grid point
  SlackTerms slack;
  std::string status = "optimal";
  nlohmann::json params = nlohmann::json::object();

  /// Bound at an arbitrary lambda. The curve is a left-continuous step
  /// function, so this is the value at the first grid point >= lambda.
  double at(double lambda_value) const;
  nlohmann::json to_json() const;
  std::string to_csv() const;
};

/// Shared input validation for (qv, n, delta).
void check_bound_inputs(const Vec& qv, const std::vector<std::size_t>& n, double delta);

/// Sorted, deduplicated union of a user grid and extra breakpoints.
Vec merge_grid(const Vec& grid, const Vec& breakpoints);

/// n points evenly spaced on [lo, hi].
Vec linspace(double lo, double hi, std::size_t n);

}  // namespace fedcert
