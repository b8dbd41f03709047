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

#include "fedcert/common.hpp"

namespace fedcert {

enum class LpStatus { kOptimal, kInfeasible, kUnbounded };

struct LpResult {
  LpStatus status = LpStatus::kOptimal;
  double objective = 0.0;
  Vec x;
};

/// maximize c.x subject to row i of A x (<=, =, >=) b_i and x >= 0, where
/// sense[i] is one of '<', '=', '>'. Dense two-phase tableau simplex with
/// Bland's rule; meant for small problems.
LpResult maximize_lp(const Mat& A, const Vec& b, const std::string& sense, const Vec& c);

}  // namespace fedcert
