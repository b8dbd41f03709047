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


#include "fedcert/bound.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <fmt/format.h>

namespace fedcert {

std::string to_string(BoundKind kind) {
  switch (kind) {
    case BoundKind::kMean: return "mean";
    case BoundKind::kCdfCurve: return "cdf";
    case BoundKind::kFdivMean: return "fdiv-mean";
    case BoundKind::kFdivCdf: return "fdiv-cdf";
    case BoundKind::kWassMean: return "wass-mean";
  }
  return "mean";
}

BoundKind parse_bound_kind(const std::string& name) {
  if (name == "mean") return BoundKind::kMean;
  if (name == "cdf" || name == "cdf-curve") return BoundKind::kCdfCurve;
  if (name == "fdiv-mean") return BoundKind::kFdivMean;
  if (name == "fdiv-cdf") return BoundKind::kFdivCdf;
  if (name == "wass-mean") return BoundKind::kWassMean;
  throw std::invalid_argument("unknown bound kind: " + name);
}

namespace {

nlohmann::json slack_json(const SlackTerms& slack) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [name, v] : slack) j[name] = v;
  return j;
}

}  // namespace

double CertifiedBound::slack_total() const {
  double total = 0.0;
  for (const auto& term : slack) total += term.second;
  return total;
}

nlohmann::json CertifiedBound::to_json() const {
  return {{"kind", to_string(kind)},
          {"value", value},
          {"raw_value", raw_value},
          {"program_value", program_value},
          {"slack", slack_json(slack)},
          {"status", status},
          {"params", params},
          {"details", details}};
}

double CdfCurve::at(double lambda_value) const {
  const auto it = std::lower_bound(lambda.begin(), lambda.end(), lambda_value);
  if (it == lambda.end()) return tail;
  return bound[static_cast<std::size_t>(it - lambda.begin())];
}

nlohmann::json CdfCurve::to_json() const {
  return {{"kind", to_string(kind)}, {"lambda", lambda},          {"bound", bound},
          {"program", program},      {"tail", tail},              {"slack", slack_json(slack)},
          {"status", status},        {"params", params}};
}

std::string CdfCurve::to_csv() const {
  std::string out = "lambda,bound\n";
  for (std::size_t i = 0; i < lambda.size(); ++i) out += fmt::format("{},{}\n", lambda[i], bound[i]);
  return out;
}

void check_bound_inputs(const Vec& qv, const std::vector<std::size_t>& n, double delta) {
  if (qv.empty()) throw std::invalid_argument("bound: need at least one client (K >= 1)");
  if (n.size() != qv.size()) throw std::invalid_argument("bound: qv and n must have the same length");
  if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("bound: delta must lie in (0, 1)");
  for (double q : qv)
    if (!(q >= 0.0 && q <= 1.0)) throw std::invalid_argument("bound: query values must lie in [0, 1]");
  for (std::size_t nk : n)
    if (nk < 1) throw std::invalid_argument("bound: every n_k must be >= 1");
}

Vec merge_grid(const Vec& grid, const Vec& breakpoints) {
  if (grid.empty()) throw std::invalid_argument("lambda grid must be nonempty");
  if (!all_finite(grid)) throw std::invalid_argument("lambda grid must be finite");
  Vec out = grid;
  out.insert(out.end(), breakpoints.begin(), breakpoints.end());
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

Vec linspace(double lo, double hi, std::size_t n) {
  if (n == 0) return {};
  if (n == 1) return {lo};
  Vec out(n);
  for (std::size_t i = 0; i < n; ++i)
    out[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
  return out;
}

}  // namespace fedcert
