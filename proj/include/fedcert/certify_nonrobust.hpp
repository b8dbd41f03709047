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

#include <vector>

#include "fedcert/bound.hpp"

namespace fedcert {

/// Upper bound on the meta-level mean loss from K ordinary query values.
CertifiedBound mean_bound(const Vec& qv, const std::vector<std::size_t>& n, double delta,
                          SlackMode slack = SlackMode::kFull);

/// Upper bound on P(R >= lambda), uniformly over lambda.
CdfCurve cdf_bound(const Vec& qv, const std::vector<std::size_t>& n, double delta,
                   const Vec& lambda_grid, SlackMode slack = SlackMode::kFull);

}  // namespace fedcert
