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


#include "fedcert/certify_nonrobust.hpp"

#include <algorithm>
#include <cmath>

namespace fedcert {

CertifiedBound mean_bound(const Vec& qv, const std::vector<std::size_t>& n, double delta,
                          SlackMode slack) {
  check_bound_inputs(qv, n, delta);
  const double K = static_cast<double>(qv.size());
  const double log_term = std::log((K + 1.0) / delta);
  double mean = 0.0, per_client = 0.0;
  for (std::size_t k = 0; k < qv.size(); ++k) {
    mean += qv[k];
    per_client += std::sqrt(log_term / (2.0 * static_cast<double>(n[k])));
  }
  mean /= K;
  per_client /= K;
  double meta = std::sqrt(log_term / (2.0 * K));
  if (slack == SlackMode::kZero) meta = per_client = 0.0;

  CertifiedBound b;
  b.kind = BoundKind::kMean;
  b.program_value = mean;
  b.slack = {{"meta", meta}, {"per_client", per_client}};
  b.raw_value = mean + meta + per_client;
  b.value = std::clamp(b.raw_value, 0.0, 1.0);
  b.params = {{"K", qv.size()}, {"n", n}, {"delta", delta},
              {"slack_mode", slack == SlackMode::kFull ? "full" : "zero"}};
  return b;
}

CdfCurve cdf_bound(const Vec& qv, const std::vector<std::size_t>& n, double delta,
                   const Vec& lambda_grid, SlackMode slack) {
  check_bound_inputs(qv, n, delta);
  const std::size_t K = qv.size();
  const double Kd = static_cast<double>(K);
  Vec breakpoints(K);
  for (std::size_t k = 0; k < K; ++k) {
    const double shift = slack == SlackMode::kFull
                             ? std::sqrt(std::log((Kd + 1.0) / delta) / (2.0 * static_cast<double>(n[k])))
                             : 0.0;
    breakpoints[k] = qv[k] + shift;
  }
  const double meta =
      slack == SlackMode::kFull ? std::sqrt(std::log(2.0 * (Kd + 1.0) / delta) / (2.0 * Kd)) : 0.0;

  CdfCurve curve;
  curve.kind = BoundKind::kCdfCurve;
  curve.lambda = merge_grid(lambda_grid, breakpoints);
  Vec sorted = breakpoints;
  std::sort(sorted.begin(), sorted.end());
  for (double lam : curve.lambda) {
    // qv_k >= lam - shift_k  <=>  breakpoint_k >= lam
    const auto above = static_cast<double>(sorted.end() - std::lower_bound(sorted.begin(), sorted.end(), lam));
    const double frac = above / Kd;
    curve.program.push_back(frac);
    curve.bound.push_back(std::clamp(frac + meta, 0.0, 1.0));
  }
  curve.tail = std::clamp(meta, 0.0, 1.0);
  curve.slack = {{"meta", meta}};
  curve.params = {{"K", K}, {"n", n}, {"delta", delta},
                  {"slack_mode", slack == SlackMode::kFull ? "full" : "zero"}};
  return curve;
}

}  // namespace fedcert
