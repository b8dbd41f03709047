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


#include "fedcert/certify_wass.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <tuple>

namespace fedcert {

std::pair<Vec, Vec> concave_majorant(const Vec& x, const Vec& y) {
  if (x.size() != y.size() || x.empty()) throw std::invalid_argument("concave_majorant: bad input");
  Vec hx, hy;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!hx.empty() && x[i] < hx.back()) throw std::invalid_argument("concave_majorant: x must be sorted");
    double yi = y[i];
    // Points a few ulps apart (chord intersections landing on grid radii) are
    // merged so that rounding cannot produce spurious steep segments.
    if (!hx.empty() && x[i] - hx.back() <= 1e-13 * std::max(1.0, std::abs(x[i]))) {
      yi = std::max(yi, hy.back());
      hx.pop_back();
      hy.pop_back();
    }
    // Drop the last vertex while it lies on or below the chord to the new point.
    while (hx.size() >= 2) {
      const std::size_t m = hx.size();
      const double cross = (hx[m - 1] - hx[m - 2]) * (yi - hy[m - 2]) -
                           (hy[m - 1] - hy[m - 2]) * (x[i] - hx[m - 2]);
      if (cross < 0.0) break;
      hx.pop_back();
      hy.pop_back();
    }
    hx.push_back(x[i]);
    hy.push_back(yi);
  }
  return {hx, hy};
}

double QvProfile::envelope(double r) const {
  if (env_rho.empty()) throw std::logic_error("QvProfile: empty envelope");
  if (r <= env_rho.front()) return env_value.front();
  if (r >= env_rho.back()) return env_value.back();
  const auto it = std::upper_bound(env_rho.begin(), env_rho.end(), r);
  const std::size_t j = static_cast<std::size_t>(it - env_rho.begin());
  const double w = (r - env_rho[j - 1]) / (env_rho[j] - env_rho[j - 1]);
  return env_value[j - 1] + w * (env_value[j] - env_value[j - 1]);
}

namespace {

struct LineFn {
  double slope, intercept;
  double at(double x) const { return slope * x + intercept; }
};

LineFn chord(const Vec& x, const Vec& y, std::size_t i, std::size_t j) {
  const double slope = (y[j] - y[i]) / (x[j] - x[i]);
  return {slope, y[i] - slope * x[i]};
}

}  // namespace

QvProfile make_profile(std::size_t client, Vec rho, Vec value, EnvelopeMode mode) {
  if (rho.size() != value.size() || rho.empty()) throw std::invalid_argument("make_profile: bad grid");
  for (std::size_t i = 1; i < rho.size(); ++i)
    if (!(rho[i] > rho[i - 1])) throw std::invalid_argument("make_profile: radii must be increasing");
  QvProfile p;
  p.client = client;
  for (std::size_t i = 0; i < value.size(); ++i) {
    value[i] = std::clamp(value[i], 0.0, 1.0);
    if (i > 0) value[i] = std::max(value[i], value[i - 1]);
  }
  p.rho = std::move(rho);
  p.value = std::move(value);

  Vec px = p.rho, py = p.value;
  if (mode == EnvelopeMode::kSoundOuter && p.rho.size() >= 2) {
    const std::size_t G = p.rho.size();
    for (std::size_t s = 0; s + 1 < G; ++s) {
      std::vector<LineFn> lines{{0.0, p.value[s + 1]}};
      if (s >= 1) lines.push_back(chord(p.rho, p.value, s - 1, s));
      if (s + 2 < G) lines.push_back(chord(p.rho, p.value, s + 1, s + 2));
      auto bound_at = [&](double x) {
        double v = std::numeric_limits<double>::infinity();
        for (const auto& l : lines) v = std::min(v, l.at(x));
        return v;
      };
      Vec xs{p.rho[s], p.rho[s + 1]};
      for (std::size_t a = 0; a < lines.size(); ++a)
        for (std::size_t b = a + 1; b < lines.size(); ++b) {
          if (lines[a].slope == lines[b].slope) continue;
          const double x = (lines[b].intercept - lines[a].intercept) / (lines[a].slope - lines[b].slope);
          if (x > p.rho[s] && x < p.rho[s + 1]) xs.push_back(x);
        }
      for (double x : xs) {
        px.push_back(x);
        py.push_back(std::max(bound_at(x), 0.0));
      }
    }
    std::vector<std::size_t> order(px.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return std::tie(px[a], py[a]) < std::tie(px[b], py[b]);
    });
    Vec sx, sy;
    for (std::size_t i : order) sx.push_back(px[i]), sy.push_back(py[i]);
    px = std::move(sx);
    py = std::move(sy);
  }
  std::tie(p.env_rho, p.env_value) = concave_majorant(px, py);
  return p;
}

RadiusBudget radius_budget(std::size_t K, double epsilon, double delta, const WassParams& params) {
  if (K == 0) throw std::invalid_argument("radius_budget: K must be >= 1");
  if (!(epsilon >= 0.0) || !std::isfinite(epsilon)) throw std::invalid_argument("wasserstein: epsilon must be >= 0");
  if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("wasserstein: delta must lie in (0, 1)");
  if (!(params.c1 >= 0.0) || !(params.c2 >= 0.0)) throw std::invalid_argument("wasserstein: c1, c2 must be >= 0");
  const double Kd = static_cast<double>(K);
  RadiusBudget b;
  b.floor = epsilon / Kd;
  b.mean_cap = epsilon * (1.0 + 1.0 / Kd);
  if (params.slack == SlackMode::kFull) b.mean_cap += params.c1 * std::sqrt(std::log((Kd + 2.0) / delta) / Kd);
  return b;
}

Vec radius_grid(std::size_t K, const RadiusBudget& budget, const WassParams& params) {
  if (params.grid_size < 2) throw std::invalid_argument("radius grid: grid_size must be >= 2");
  const double top = static_cast<double>(K) * budget.mean_cap;
  const std::size_t G = params.grid_size;
  if (!(top > budget.floor)) return {budget.floor};
  Vec grid;
  auto geometric = [&](double from, std::size_t count) {
    const double ratio = std::pow(top / from, 1.0 / static_cast<double>(count - 1));
    for (std::size_t i = 0; i < count; ++i)
      grid.push_back(i + 1 == count ? top : from * std::pow(ratio, static_cast<double>(i)));
  };
  if (budget.floor > 0.0) {
    if (params.envelope == EnvelopeMode::kSoundOuter) grid.push_back(0.0);
    geometric(budget.floor, G);
  } else {
    grid.push_back(0.0);
    geometric(top * 1e-3, G - 1);
  }
  return grid;
}

std::vector<QvProfile> build_profiles(Network& network, const Hypothesis& h, const LossFn& loss_fn,
                                      double epsilon, double delta, const WassParams& params) {
  const std::size_t K = network.size();
  const RadiusBudget budget = radius_budget(K, epsilon, delta, params);
  const Vec grid = radius_grid(K, budget, params);
  std::vector<QvProfile> profiles(K);
  parallel_for(K, params.jobs, [&](std::size_t k) {
    Vec values;
    SolverStatus status = SolverStatus::kExact;
    for (double r : grid) {
      const QueryValue q = network.query(k, h, loss_fn, r);
      values.push_back(q.value);
      if (static_cast<int>(q.status) > static_cast<int>(status)) status = q.status;
    }
    profiles[k] = make_profile(k, grid, values, params.envelope);
    profiles[k].status = status;
  });
  return profiles;
}

nlohmann::json RadiusAllocation::to_json() const {
  return {{"rho", rho}, {"mean_rho", mean_rho}, {"qv_at_rho", qv_at_rho}, {"objective", objective}};
}

RadiusAllocation max_allocation(const std::vector<QvProfile>& profiles, const RadiusBudget& budget) {
  const std::size_t K = profiles.size();
  if (K == 0) throw std::invalid_argument("max_allocation: no profiles");
  struct Segment {
    double slope, length;
    std::size_t client, index;
  };
  std::vector<Segment> segments;
  for (std::size_t k = 0; k < K; ++k) {
    const auto& p = profiles[k];
    double x0 = budget.floor, y0 = p.envelope(budget.floor);
    std::size_t idx = 0;
    for (std::size_t i = 0; i < p.env_rho.size(); ++i) {
      const double x1 = p.env_rho[i];
      if (x1 <= x0) continue;
      const double y1 = p.env_value[i];
      const double slope = (y1 - y0) / (x1 - x0);
      if (slope > 0.0) segments.push_back({slope, x1 - x0, k, idx++});
      x0 = x1;
      y0 = y1;
    }
  }
  // Concave envelopes have decreasing slopes, so the greedy order respects
  // each client's segment order.
  std::stable_sort(segments.begin(), segments.end(), [](const Segment& a, const Segment& b) {
    if (a.slope != b.slope) return a.slope > b.slope;
    if (a.client != b.client) return a.client < b.client;
    return a.index < b.index;
  });
  RadiusAllocation out;
  out.rho.assign(K, budget.floor);
  double remaining = static_cast<double>(K) * (budget.mean_cap - budget.floor);
  for (const auto& s : segments) {
    if (remaining <= 0.0) break;
    const double take = std::min(s.length, remaining);
    out.rho[s.client] += take;
    remaining -= take;
  }
  double total_rho = 0.0, total_qv = 0.0;
  for (std::size_t k = 0; k < K; ++k) {
    const double v = profiles[k].envelope(out.rho[k]);
    out.qv_at_rho.push_back(v);
    total_qv += v;
    total_rho += out.rho[k];
  }
  out.mean_rho = total_rho / static_cast<double>(K);
  out.objective = total_qv / static_cast<double>(K);
  return out;
}

FeasibilityResult feasibility_check(double t, const std::vector<QvProfile>& profiles, double epsilon,
                                    double delta, const WassParams& params) {
  const RadiusBudget budget = radius_budget(profiles.size(), epsilon, delta, params);
  FeasibilityResult r;
  r.witness = max_allocation(profiles, budget);
  r.feasible = r.witness.objective >= t;
  return r;
}

nlohmann::json BisectionTrace::to_json() const {
  nlohmann::json steps_json = nlohmann::json::array();
  for (const auto& s : steps)
    steps_json.push_back({{"a", s.a}, {"b", s.b}, {"t", s.t}, {"feasible", s.feasible}});
  return {{"Delta", Delta}, {"iterations", steps_json}};
}

BisectionResult bisection_certificate(const std::vector<QvProfile>& profiles, double epsilon,
                                      double delta, const WassParams& params) {
  if (!(params.Delta > 0.0)) throw std::invalid_argument("bisection: Delta must be > 0");
  const RadiusBudget budget = radius_budget(profiles.size(), epsilon, delta, params);
  // The water-filling optimum does not depend on t, so one solve answers
  // every feasibility question of the bisection.
  const RadiusAllocation best = max_allocation(profiles, budget);
  BisectionResult out;
  out.trace.Delta = params.Delta;
  out.witness = best;
  double a = 0.0, b = 1.0;
  while (b - a > params.Delta) {
    const double t = 0.5 * (a + b);
    const bool feasible = best.objective >= t;
    out.trace.steps.push_back({a, b, t, feasible});
    (feasible ? a : b) = t;
  }
  out.value = b;
  return out;
}

CertifiedBound wass_mean_bound(const std::vector<QvProfile>& profiles,
                               const std::vector<std::size_t>& n, double epsilon, double delta,
                               const WassParams& params) {
  const std::size_t K = profiles.size();
  if (n.size() != K) throw std::invalid_argument("wass_mean_bound: one sample count per client");
  const bool full = params.slack == SlackMode::kFull;
  if (full && !(epsilon > 0.0))
    throw std::invalid_argument("wass_mean_bound: epsilon must be > 0 (the per-client slack diverges at 0)");
  const RadiusBudget budget = radius_budget(K, epsilon, delta, params);
  const BisectionResult res = bisection_certificate(profiles, epsilon, delta, params);

  const double Kd = static_cast<double>(K);
  double meta = 0.0, per_client = 0.0;
  if (full) {
    meta = std::sqrt(std::log((Kd + 2.0) / delta) / (2.0 * Kd));
    for (std::size_t nk : n) {
      if (nk < 1) throw std::invalid_argument("wass_mean_bound: every n_k must be >= 1");
      const double nd = static_cast<double>(nk);
      per_client += params.c2 * std::sqrt(std::log((Kd + 2.0) * nd / (epsilon * delta)) / nd);
    }
    per_client /= Kd;
  }
  std::string status = "optimal";
  for (const auto& p : profiles)
    if (p.status == SolverStatus::kNotConverged) status = "inner-not-converged";

  CertifiedBound b;
  b.kind = BoundKind::kWassMean;
  b.program_value = res.value;
  b.slack = {{"meta", meta}, {"per_client", per_client}};
  b.raw_value = res.value + meta + per_client;
  b.value = std::clamp(b.raw_value, 0.0, 1.0);
  b.status = status;
  b.params = {{"K", K},
              {"n", n},
              {"delta", delta},
              {"epsilon", epsilon},
              {"c1", params.c1},
              {"c2", params.c2},
              {"Delta", params.Delta},
              {"grid_size", params.grid_size},
              {"envelope", params.envelope == EnvelopeMode::kSoundOuter ? "sound-outer" : "sample-hull"},
              {"slack_mode", full ? "full" : "zero"}};
  nlohmann::json prof = nlohmann::json::array();
  for (const auto& p : profiles) prof.push_back({{"rho", p.rho}, {"value", p.value}});
  b.details = {{"rho_floor", budget.floor},
               {"rho_mean_cap", budget.mean_cap},
               {"max_objective", res.witness.objective},
               {"witness", res.witness.to_json()},
               {"bisection", res.trace.to_json()},
               {"profiles", prof}};
  return b;
}

CertifiedBound wass_mean_bound(Network& network, const Hypothesis& h, const LossFn& loss_fn,
                               double epsilon, double delta, const WassParams& params) {
  if (params.slack == SlackMode::kFull && !(epsilon > 0.0))
    throw std::invalid_argument("wass_mean_bound: epsilon must be > 0 (the per-client slack diverges at 0)");
  const auto profiles = build_profiles(network, h, loss_fn, epsilon, delta, params);
  return wass_mean_bound(profiles, network.sample_counts(), epsilon, delta, params);
}

}  // namespace fedcert
