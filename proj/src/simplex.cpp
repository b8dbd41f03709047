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


#include "fedcert/simplex.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace fedcert {

namespace {

constexpr double kEps = 1e-11;

class Tableau {
 public:
  // Rows 0..m-1 are constraints, row m is the objective (reduced costs).
  Tableau(std::size_t m, std::size_t cols) : m_(m), cols_(cols), t_(m + 1, Vec(cols + 1, 0.0)), basis_(m) {}

  Vec& row(std::size_t i) { return t_[i]; }
  double& rhs(std::size_t i) { return t_[i][cols_]; }
  std::size_t& basis(std::size_t i) { return basis_[i]; }

  // Minimizes the objective row; `allowed` masks columns that may enter.
  bool optimize(const std::vector<bool>& allowed) {
    for (;;) {
      std::size_t enter = cols_;
      for (std::size_t j = 0; j < cols_; ++j)
        if (allowed[j] && t_[m_][j] < -kEps) {
          enter = j;
          break;
        }
      if (enter == cols_) return true;
      std::size_t leave = m_;
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < m_; ++i) {
        if (t_[i][enter] <= kEps) continue;
        const double ratio = t_[i][cols_] / t_[i][enter];
        if (leave == m_ || ratio < best - kEps ||
            (std::abs(ratio - best) <= kEps && basis_[i] < basis_[leave])) {
          best = ratio;
          leave = i;
        }
      }
      if (leave == m_) return false;
      pivot(leave, enter);
    }
  }

  void pivot(std::size_t r, std::size_t c) {
    const double p = t_[r][c];
    for (auto& v : t_[r]) v /= p;
    for (std::size_t i = 0; i <= m_; ++i) {
      if (i == r || t_[i][c] == 0.0) continue;
      const double f = t_[i][c];
      for (std::size_t j = 0; j <= cols_; ++j) t_[i][j] -= f * t_[r][j];
    }
    basis_[r] = c;
  }

 private:
  std::size_t m_, cols_;
  Mat t_;
  std::vector<std::size_t> basis_;
};

}  // namespace

LpResult maximize_lp(const Mat& A, const Vec& b, const std::string& sense, const Vec& c) {
  const std::size_t m = A.size(), n = c.size();
  if (b.size() != m || sense.size() != m) throw std::invalid_argument("maximize_lp: shape mismatch");
  for (const auto& r : A)
    if (r.size() != n) throw std::invalid_argument("maximize_lp: shape mismatch");

  // Columns: original, one slack/surplus per inequality, one artificial per row.
  std::size_t slack_count = 0;
  for (char s : sense) {
    if (s != '<' && s != '=' && s != '>') throw std::invalid_argument("maximize_lp: bad sense");
    if (s != '=') ++slack_count;
  }
  const std::size_t art0 = n + slack_count;
  const std::size_t cols = art0 + m;
  Tableau tab(m, cols);
  std::size_t slack = n;
  for (std::size_t i = 0; i < m; ++i) {
    const double sign = b[i] < 0.0 ? -1.0 : 1.0;
    Vec& r = tab.row(i);
    for (std::size_t j = 0; j < n; ++j) r[j] = sign * A[i][j];
    if (sense[i] == '<') r[slack++] = sign;
    if (sense[i] == '>') r[slack++] = -sign;
    r[art0 + i] = 1.0;
    tab.rhs(i) = sign * b[i];
    tab.basis(i) = art0 + i;
  }
  // Phase 1: minimize the sum of artificials.
  Vec& obj = tab.row(m);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j <= cols; ++j)
      if (j < art0 || j == cols) obj[j] -= tab.row(i)[j];
  std::vector<bool> allowed(cols, true);
  tab.optimize(allowed);
  LpResult res;
  if (-tab.rhs(m) > 1e-8) {
    res.status = LpStatus::kInfeasible;
    return res;
  }
  // Drive remaining artificials out of the basis where possible.
  for (std::size_t i = 0; i < m; ++i) {
    if (tab.basis(i) < art0) continue;
    for (std::size_t j = 0; j < art0; ++j)
      if (std::abs(tab.row(i)[j]) > kEps) {
        tab.pivot(i, j);
        break;
      }
  }
  for (std::size_t j = art0; j < cols; ++j) allowed[j] = false;

  // Phase 2: minimize -c.x.
  Vec& obj2 = tab.row(m);
  std::fill(obj2.begin(), obj2.end(), 0.0);
  for (std::size_t j = 0; j < n; ++j) obj2[j] = -c[j];
  for (std::size_t i = 0; i < m; ++i) {
    const std::size_t bcol = tab.basis(i);
    const double f = obj2[bcol];
    if (f == 0.0) continue;
    for (std::size_t j = 0; j <= cols; ++j) obj2[j] -= f * tab.row(i)[j];
  }
  if (!tab.optimize(allowed)) {
    res.status = LpStatus::kUnbounded;
    return res;
  }
  res.x.assign(n, 0.0);
  for (std::size_t i = 0; i < m; ++i)
    if (tab.basis(i) < n) res.x[tab.basis(i)] = tab.rhs(i);
  double value = 0.0;
  for (std::size_t j = 0; j < n; ++j) value += c[j] * res.x[j];
  res.objective = value;
  return res;
}

}  // namespace fedcert
