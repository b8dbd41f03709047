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


#include "fedcert/certify_fdiv.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <stdexcept>

namespace fedcert {

double divergence_generator(DivergenceKind kind, double t) {
  if (kind == DivergenceKind::kKL) return t > 0.0 ? t * std::log(t) : 0.0;
  return (t - 1.0) * (t - 1.0);
}

double DivergenceSpec::f_prime(double t) const {
  if (kind == DivergenceKind::kKL) return std::log(t) + 1.0;
  return 2.0 * (t - 1.0);
}

double DivergenceSpec::best_weight(double slope, double eta) const {
  if (kind == DivergenceKind::kKL) {
    const double x = slope / eta - 1.0;
    if (x >= std::log(cap)) return cap;
    return std::exp(x);
  }
  return std::clamp(1.0 + slope / (2.0 * eta), 0.0, cap);
}

nlohmann::json DivergenceSpec::to_json() const {
  return {{"name", to_string(kind)}, {"epsilon", epsilon}, {"delta", delta},
          {"cap", cap},              {"c1", c1},           {"c2", c2}};
}

namespace {

double golden_min(const std::function<double(double)>& fn, double a, double b) {
  const double r = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - r * (b - a), d = a + r * (b - a);
  double fc = fn(c), fd = fn(d);
  for (int it = 0; it < 200 && b - a > 1e-13; ++it) {
    if (fc <= fd) {
      b = d, d = c, fd = fc;
      c = b - r * (b - a);
      fc = fn(c);
    } else {
      a = c, c = d, fc = fd;
      d = a + r * (b - a);
      fd = fn(d);
    }
  }
  return std::min({fn(a), fn(b), fc, fd});
}

}  // namespace

DivergenceSpec make_divergence(DivergenceKind kind, double epsilon, double delta) {
  if (!(epsilon >= 0.0) || !std::isfinite(epsilon)) throw std::invalid_argument("make_divergence: epsilon must be >= 0");
  if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("make_divergence: delta must lie in (0, 1)");
  DivergenceSpec s;
  s.kind = kind;
  s.epsilon = epsilon;
  s.delta = delta;
  const double level = epsilon / delta;
  if (level > 0.0) {
    double lo = 1.0, hi = 2.0;
    while (s.f(hi) <= level) lo = hi, hi *= 2.0;
    for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
      const double mid = 0.5 * (lo + hi);
      (s.f(mid) <= level ? lo : hi) = mid;
    }
    s.cap = lo;
  }
  const double lower = 1.0 / s.cap;
  const double top = std::max(s.f(lower), s.f(s.cap));
  const double bottom = golden_min([&](double t) { return s.f(t); }, lower, s.cap);
  s.c1 = (s.cap - lower) / std::sqrt(2.0);
  s.c2 = std::max(0.0, top - bottom) / std::sqrt(2.0);
  return s;
}

namespace {

// Distinct coefficient values with multiplicities; the program's optimum
// gives equal weights to equal coefficients.
struct Groups {
  Vec value;
  Vec count;
  double total = 0.0;
};

Groups group(const Vec& q) {
  std::map<double, double> m;
  for (double v : q) m[v] += 1.0;
  Groups g;
  for (const auto& [v, c] : m) {
    g.value.push_back(v);
    g.count.push_back(c);
  }
  g.total = static_cast<double>(q.size());
  return g;
}

class PenalizedSolver {
 public:
  PenalizedSolver(const Groups& g, const DivergenceSpec& spec, double band)
      : g_(g), spec_(spec), band_(band) {}

  double mean_alpha(double tau, double eta) const {
    double s = 0.0;
    for (std::size_t i = 0; i < g_.value.size(); ++i)
      s += g_.count[i] * spec_.best_weight(g_.value[i] - tau, eta);
    return s / g_.total;
  }

  // Mean-band multiplier for a given eta; the returned tau always satisfies
  // the band exactly.
  double tau_for(double eta) const {
    const double upper = 1.0 + band_, lower = 1.0 - band_;
    const double m0 = mean_alpha(0.0, eta);
    if (m0 <= upper && m0 >= lower) return 0.0;
    if (m0 > upper) {
      double lo = 0.0, hi = 1.0;
      while (mean_alpha(hi, eta) > upper) lo = hi, hi *= 2.0;
      for (int it = 0; it < 300 && hi - lo > 1e-15 * std::max(1.0, hi); ++it) {
        const double mid = 0.5 * (lo + hi);
        (mean_alpha(mid, eta) > upper ? lo : hi) = mid;
      }
      return hi;
    }
    double lo = -1.0, hi = 0.0;
    while (mean_alpha(lo, eta) < lower) hi = lo, lo *= 2.0;
    for (int it = 0; it < 300 && hi - lo > 1e-15 * std::max(1.0, -lo); ++it) {
      const double mid = 0.5 * (lo + hi);
      (mean_alpha(mid, eta) < lower ? hi : lo) = mid;
    }
    return lo;
  }

  double mean_f(double tau, double eta) const {
    double s = 0.0;
    for (std::size_t i = 0; i < g_.value.size(); ++i)
      s += g_.count[i] * spec_.f(spec_.best_weight(g_.value[i] - tau, eta));
    return s / g_.total;
  }

 private:
  const Groups& g_;
  const DivergenceSpec& spec_;
  double band_;
};

void finish(ReweightSolution& sol, const Vec& q, const DivergenceSpec& spec, double budget,
            double band) {
  const double K = static_cast<double>(q.size());
  double obj = 0.0, ma = 0.0, mf = 0.0, psi = 0.0;
  for (std::size_t k = 0; k < q.size(); ++k) {
    const double a = sol.alpha[k];
    obj += a * q[k];
    ma += a;
    mf += spec.f(a);
    if (sol.eta > 0.0) {
      psi += a * (q[k] - sol.tau) - sol.eta * spec.f(a);
    } else {
      psi += spec.cap * std::max(0.0, q[k] - sol.tau);
    }
  }
  sol.objective = obj / K;
  sol.mean_alpha = ma / K;
  sol.mean_f = mf / K;
  sol.dual_value = psi / K + sol.tau + band * std::abs(sol.tau) + sol.eta * budget;
  const bool ok = std::abs(sol.mean_alpha - 1.0) <= band + 1e-6 && sol.mean_f <= budget + 1e-6;
  sol.status = ok ? "optimal" : "tolerance";
}

}  // namespace

ReweightSolution solve_reweight(const Vec& q, const DivergenceSpec& spec, double eps_budget,
                                double band) {
  if (q.empty()) throw std::invalid_argument("solve_reweight: empty coefficient vector");
  if (!all_finite(q)) throw std::invalid_argument("solve_reweight: coefficients must be finite");
  if (!(band >= 0.0) || !(eps_budget >= 0.0))
    throw std::invalid_argument("solve_reweight: band and budget must be >= 0");
  const std::size_t K = q.size();
  ReweightSolution sol;
  sol.alpha.assign(K, 1.0);

  if (band == 0.0 && eps_budget == 0.0) {
    finish(sol, q, spec, eps_budget, band);
    return sol;
  }

  const Groups g = group(q);

  // Linear relaxation without the divergence budget: saturate the largest
  // coefficients until the upper mean band is reached. Tied coefficients share
  // their mass evenly, the cheapest choice for a convex f.
  {
    std::map<double, double> weight_of;
    double mass = static_cast<double>(K) * std::min(1.0 + band, spec.cap);
    double marginal = 0.0;
    for (std::size_t i = g.value.size(); i-- > 0;) {
      const double a = std::min(spec.cap, std::max(0.0, mass) / g.count[i]);
      weight_of[g.value[i]] = a;
      if (mass > 0.0) marginal = g.value[i];
      mass -= a * g.count[i];
    }
    for (std::size_t k = 0; k < K; ++k) sol.alpha[k] = weight_of[q[k]];
    sol.tau = 1.0 + band < spec.cap ? marginal : 0.0;
    double mf = 0.0;
    for (double a : sol.alpha) mf += spec.f(a);
    if (mf / static_cast<double>(K) <= eps_budget) {
      finish(sol, q, spec, eps_budget, band);
      return sol;
    }
  }

  const PenalizedSolver solver(g, spec, band);
  auto excess = [&](double eta) { return solver.mean_f(solver.tau_for(eta), eta); };

  double hi = 1.0;
  while (excess(hi) > eps_budget && hi < 1e15) hi *= 2.0;
  // Below this scale the band multiplier can no longer be resolved in double
  // precision, so smaller eta would report a spuriously feasible budget.
  double lo = 1e-9 * std::max(1.0, g.value.back() - g.value.front());
  if (excess(lo) <= eps_budget) {
    hi = lo;
  } else {
    for (int it = 0; it < 300 && hi / lo > 1.0 + 1e-13; ++it) {
      const double mid = std::sqrt(lo * hi);
      (excess(mid) > eps_budget ? lo : hi) = mid;
    }
  }
  sol.eta = hi;
  sol.tau = solver.tau_for(hi);
  for (std::size_t k = 0; k < K; ++k) sol.alpha[k] = spec.best_weight(q[k] - sol.tau, sol.eta);
  finish(sol, q, spec, eps_budget, band);
  return sol;
}

namespace {

nlohmann::json base_params(const Vec& qv, const std::vector<std::size_t>& n, double delta,
                           const DivergenceSpec& spec, SlackMode slack) {
  return {{"K", qv.size()},
          {"n", n},
          {"delta", delta},
          {"epsilon", spec.epsilon},
          {"divergence", spec.to_json()},
          {"slack_mode", slack == SlackMode::kFull ? "full" : "zero"}};
}

}  // namespace

CertifiedBound fdiv_mean_bound(const Vec& qv, const std::vector<std::size_t>& n, double delta,
                               double epsilon, DivergenceKind kind, const FdivOptions& options) {
  check_bound_inputs(qv, n, delta);
  const DivergenceSpec spec = make_divergence(kind, epsilon, delta);
  const double K = static_cast<double>(qv.size());
  const bool full = options.slack == SlackMode::kFull;
  const double conc = std::sqrt(std::log(1.0 / delta) / K);
  const double band = full ? spec.c1 * conc : 0.0;
  const double budget = epsilon + (full ? spec.c2 * conc : 0.0);
  const ReweightSolution sol = solve_reweight(qv, spec, budget, band);

  const double log_term = std::log((K + 3.0) / delta);
  double meta = spec.cap * std::sqrt(log_term / (2.0 * K));
  double per_client = 0.0;
  for (std::size_t nk : n) per_client += std::sqrt(log_term / (2.0 * static_cast<double>(nk)));
  per_client /= K;
  if (!full) meta = per_client = 0.0;

  CertifiedBound b;
  b.kind = BoundKind::kFdivMean;
  b.program_value = sol.objective;
  b.slack = {{"meta", meta}, {"per_client", per_client}};
  b.raw_value = sol.objective + meta + per_client;
  b.value = std::clamp(b.raw_value, 0.0, 1.0);
  b.status = sol.status;
  b.params = base_params(qv, n, delta, spec, options.slack);
  b.details = {{"band", band},      {"budget", budget},         {"tau", sol.tau},
               {"eta", sol.eta},    {"dual_value", sol.dual_value},
               {"mean_alpha", sol.mean_alpha}, {"mean_f", sol.mean_f}};
  if (options.include_alpha) b.details["alpha"] = sol.alpha;
  return b;
}

CdfCurve fdiv_cdf_bound(const Vec& qv, const std::vector<std::size_t>& n, double delta,
                        double epsilon, DivergenceKind kind, const Vec& lambda_grid,
                        const FdivOptions& options) {
  check_bound_inputs(qv, n, delta);
  if (!(options.cdf_constant >= 0.0)) throw std::invalid_argument("fdiv_cdf_bound: constant must be >= 0");
  const DivergenceSpec spec = make_divergence(kind, epsilon, delta);
  const std::size_t K = qv.size();
  const double Kd = static_cast<double>(K);
  const bool full = options.slack == SlackMode::kFull;
  const double conc = std::sqrt(std::log(Kd / delta) / Kd);
  const double band = full ? spec.c1 * conc : 0.0;
  const double budget = epsilon + (full ? spec.c2 * conc : 0.0);

  Vec breakpoints(K);
  for (std::size_t k = 0; k < K; ++k) {
    const double shift = full ? std::sqrt(std::log((Kd + 2.0) / delta) / (2.0 * static_cast<double>(n[k]))) : 0.0;
    breakpoints[k] = qv[k] + shift;
  }
  const double pad_program = full ? options.cdf_constant * conc : 0.0;
  const double pad_dkw = full ? std::sqrt(std::log(2.0 * (Kd + 2.0) / delta) / (2.0 * Kd)) : 0.0;
  const double pad = pad_program + pad_dkw;

  // The program only depends on how many indicators are on.
  Vec by_count(K + 1, 0.0);
  std::vector<std::string> status(K + 1, "optimal");
  parallel_for(K, options.jobs, [&](std::size_t i) {
    const std::size_t ones = i + 1;
    Vec b(K, 0.0);
    std::fill(b.end() - static_cast<std::ptrdiff_t>(ones), b.end(), 1.0);
    const ReweightSolution sol = solve_reweight(b, spec, budget, band);
    by_count[ones] = sol.objective;
    status[ones] = sol.status;
  });
  // More indicators on can only raise the optimum; weights optimal for fewer
  // stay feasible, so a running maximum removes solver round-off.
  for (std::size_t ones = 1; ones <= K; ++ones) by_count[ones] = std::max(by_count[ones], by_count[ones - 1]);

  CdfCurve curve;
  curve.kind = BoundKind::kFdivCdf;
  curve.lambda = merge_grid(lambda_grid, breakpoints);
  Vec sorted = breakpoints;
  std::sort(sorted.begin(), sorted.end());
  for (double lam : curve.lambda) {
    const auto ones = static_cast<std::size_t>(sorted.end() - std::lower_bound(sorted.begin(), sorted.end(), lam));
    curve.program.push_back(by_count[ones]);
    curve.bound.push_back(std::clamp(by_count[ones] + pad, 0.0, 1.0));
    if (status[ones] != "optimal") curve.status = status[ones];
  }
  curve.tail = std::clamp(pad, 0.0, 1.0);
  curve.slack = {{"program_pad", pad_program}, {"dkw", pad_dkw}};
  curve.params = base_params(qv, n, delta, spec, options.slack);
  curve.params["band"] = band;
  curve.params["budget"] = budget;
  curve.params["cdf_constant"] = options.cdf_constant;
  return curve;
}

}  // namespace fedcert
