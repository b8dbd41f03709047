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


#include "fedcert/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include <fmt/format.h>

#include "fedcert/certify_nonrobust.hpp"
#include "fedcert/rng.hpp"
#include "fedcert/simplex.hpp"

namespace fedcert {

using nlohmann::json;

namespace {

double generator(DivergenceKind kind, double t) {
  if (kind == DivergenceKind::kChiSquare) return (t - 1.0) * (t - 1.0);
  return t <= 0.0 ? 0.0 : t * std::log(t);
}

}  // namespace

double grid_reweight_oracle(const Vec& q, const DivergenceSpec& spec, double eps_budget, double band,
                            double step) {
  const std::size_t K = q.size();
  if (K == 0 || K > 3) throw std::invalid_argument("grid_reweight_oracle: supports 1 <= K <= 3 only");
  if (!(step > 0.0)) throw std::invalid_argument("grid_reweight_oracle: step must be > 0");
  for (double v : q)
    if (!(v >= 0.0)) throw std::invalid_argument("grid_reweight_oracle: coefficients must be >= 0");
  const auto N = static_cast<long>(std::floor(spec.cap / step + 1e-9));
  Vec fv(static_cast<std::size_t>(N) + 1);
  long argmin = 0;
  for (long i = 0; i <= N; ++i) {
    fv[static_cast<std::size_t>(i)] = generator(spec.kind, static_cast<double>(i) * step);
    if (fv[static_cast<std::size_t>(i)] < fv[static_cast<std::size_t>(argmin)]) argmin = i;
  }
  const double fmin = fv[static_cast<std::size_t>(argmin)];
  const double Kd = static_cast<double>(K);
  const double tol = 1e-9;
  const double sum_lo = Kd * (1.0 - band) - tol, sum_hi = Kd * (1.0 + band) + tol;
  const double f_cap = Kd * eps_budget + 1e-12;

  double best = -std::numeric_limits<double>::infinity();
  // Completes a partial assignment with the largest feasible last weight.
  auto finish = [&](double sum_alpha, double sum_f, double obj) {
    const long i_max = std::min<long>(N, static_cast<long>(std::floor((sum_hi - sum_alpha) / step + 1e-9)));
    const long i_min = std::max<long>(0, static_cast<long>(std::ceil((sum_lo - sum_alpha) / step - 1e-9)));
    if (i_max < i_min) return;
    const double room = f_cap - sum_f;
    long pick = -1;
    if (fv[static_cast<std::size_t>(i_max)] <= room) {
      pick = i_max;
    } else if (i_max > argmin) {
      long lo = std::max(i_min, argmin);
      if (fv[static_cast<std::size_t>(lo)] > room) return;
      long hi = i_max;  // fv[lo] <= room < fv[hi], fv nondecreasing on [lo, hi]
      while (hi - lo > 1) {
        const long mid = (lo + hi) / 2;
        (fv[static_cast<std::size_t>(mid)] <= room ? lo : hi) = mid;
      }
      pick = lo;
    }
    if (pick < 0) return;
    best = std::max(best, (obj + q[K - 1] * static_cast<double>(pick) * step) / Kd);
  };

  if (K == 1) {
    finish(0.0, 0.0, 0.0);
  } else {
    for (long i = 0; i <= N; ++i) {
      const double a1 = static_cast<double>(i) * step;
      const double f1 = fv[static_cast<std::size_t>(i)];
      if (f1 + (Kd - 1.0) * fmin > f_cap) continue;
      if (K == 2) {
        finish(a1, f1, q[0] * a1);
        continue;
      }
      for (long j = 0; j <= N; ++j) {
        const double a2 = static_cast<double>(j) * step;
        const double f2 = f1 + fv[static_cast<std::size_t>(j)];
        if (f2 + fmin > f_cap || a1 + a2 > sum_hi) continue;
        finish(a1 + a2, f2, q[0] * a1 + q[1] * a2);
      }
    }
  }
  if (!std::isfinite(best)) throw std::logic_error("grid_reweight_oracle: no feasible grid point");
  return best;
}

double wass_ball_lp_oracle(const Mat& losses, const Mat& costs, double rho) {
  const std::size_t n = losses.size();
  if (n == 0 || costs.size() != n) throw std::invalid_argument("wass_ball_lp_oracle: shape mismatch");
  const std::size_t m = losses[0].size();
  if (m > 20) throw std::invalid_argument("wass_ball_lp_oracle: at most 20 support points");
  if (!(rho >= 0.0)) throw std::invalid_argument("wass_ball_lp_oracle: rho must be >= 0");
  struct Var {
    std::size_t i, j;
  };
  std::vector<Var> vars;
  for (std::size_t i = 0; i < n; ++i) {
    if (losses[i].size() != m || costs[i].size() != m)
      throw std::invalid_argument("wass_ball_lp_oracle: shape mismatch");
    for (std::size_t j = 0; j < m; ++j)
      if (std::isfinite(costs[i][j])) vars.push_back({i, j});
  }
  const double mass = 1.0 / static_cast<double>(n);
  Mat A(n + 1, Vec(vars.size(), 0.0));
  Vec b(n + 1, mass), c(vars.size());
  std::string sense(n, '=');
  sense.push_back('<');
  b[n] = rho;
  for (std::size_t v = 0; v < vars.size(); ++v) {
    A[vars[v].i][v] = 1.0;
    A[n][v] = costs[vars[v].i][vars[v].j];
    c[v] = losses[vars[v].i][vars[v].j];
  }
  const LpResult r = maximize_lp(A, b, sense, c);
  if (r.status != LpStatus::kOptimal) throw std::logic_error("wass_ball_lp_oracle: LP not solved");
  return r.objective;
}

double grid_allocation_oracle(const std::vector<std::function<double(double)>>& qv, double floor,
                              double mean_cap, std::size_t steps) {
  const std::size_t K = qv.size();
  if (K == 0 || K > 3) throw std::invalid_argument("grid_allocation_oracle: supports 1 <= K <= 3 only");
  if (steps == 0) throw std::invalid_argument("grid_allocation_oracle: steps must be >= 1");
  const double total = static_cast<double>(K) * (mean_cap - floor);
  if (total < 0.0) throw std::invalid_argument("grid_allocation_oracle: cap below floor");
  const double h = total / static_cast<double>(steps);
  auto at = [&](std::size_t k, std::size_t i) { return qv[k](floor + h * static_cast<double>(i)); };
  double best = -std::numeric_limits<double>::infinity();
  const std::size_t S = steps;
  if (K == 1) {
    for (std::size_t i = 0; i <= S; ++i) best = std::max(best, at(0, i));
  } else if (K == 2) {
    Vec second(S + 1);
    for (std::size_t j = 0; j <= S; ++j) second[j] = at(1, j);
    for (std::size_t i = 0; i <= S; ++i) {
      const double first = at(0, i);
      for (std::size_t j = 0; i + j <= S; ++j) best = std::max(best, (first + second[j]) / 2.0);
    }
  } else {
    Vec v1(S + 1), v2(S + 1);
    for (std::size_t j = 0; j <= S; ++j) v1[j] = at(1, j), v2[j] = at(2, j);
    for (std::size_t i = 0; i <= S; ++i) {
      const double first = at(0, i);
      for (std::size_t j = 0; i + j <= S; ++j)
        for (std::size_t l = 0; i + j + l <= S; ++l) best = std::max(best, (first + v1[j] + v2[l]) / 3.0);
    }
  }
  return best;
}

bool has_closed_form_risk(const MetaConfig& cfg, const Hypothesis& h, const LossFn& loss_fn) {
  if (loss_fn.kind != LossKind::kZeroOne || cfg.classes != 2) return false;
  if (h.kind() == ModelKind::kLookupTable) return false;
  return h.outputs() == 2 || (h.outputs() == 1 && h.kind() == ModelKind::kLinear);
}

namespace {

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

// P(N(mean, sd^2) > 0), or >= 0 when `inclusive`.
double positive_prob(double mean, double sd, bool inclusive) {
  if (sd > 0.0) return normal_cdf(mean / sd);
  return (inclusive ? mean >= 0.0 : mean > 0.0) ? 1.0 : 0.0;
}

}  // namespace

double client_risk(const MetaConfig& cfg, const ClientSpec& spec, const Hypothesis& h,
                   const LossFn& loss_fn, std::size_t mc_samples) {
  if (!has_closed_form_risk(cfg, h, loss_fn)) {
    if (mc_samples == 0) throw std::invalid_argument("client_risk: need Monte-Carlo samples");
    const LocalDataset data =
        generate_dataset(spec, mc_samples, cfg, derive_seed(spec.seed, stream::kRiskEval, 0));
    double total = 0.0;
    for (const auto& z : data.samples) total += loss(loss_fn, h, z);
    return total / static_cast<double>(mc_samples);
  }
  const std::size_t d = cfg.dim;
  if (h.dim() != d) throw std::invalid_argument("client_risk: model dimension mismatch");
  // Decision statistic D = u.x + beta; class 1 is predicted when D > 0 (two
  // outputs, ties go to class 0) or D >= 0 (single thresholded output).
  Vec u(d);
  double beta;
  const bool single = h.outputs() == 1;
  if (single) {
    u = h.weights()[0];
    beta = h.bias()[0] - 0.5;
  } else {
    for (std::size_t j = 0; j < d; ++j) u[j] = h.weights()[1][j] - h.weights()[0][j];
    beta = h.bias()[1] - h.bias()[0];
  }
  // x~ = A x + shift + class_shift[c] with A = I + Lambda and x ~ N(m_c, s^2 I).
  Vec Atu(d, 0.0);
  for (std::size_t r = 0; r < d; ++r)
    for (std::size_t j = 0; j < d; ++j) Atu[j] += u[r] * ((r == j ? 1.0 : 0.0) + spec.affine[r][j]);
  const double sd = cfg.noise_std * std::sqrt(squared_norm(Atu));
  double risk = 0.0;
  for (std::size_t c = 0; c < 2; ++c) {
    double mean = beta + dot(Atu, cfg.class_means[c]);
    for (std::size_t r = 0; r < d; ++r) mean += u[r] * (spec.shift[r] + spec.class_shift[c][r]);
    const double p1 = positive_prob(mean, sd, single);
    risk += spec.proportions[c] * (c == 0 ? p1 : 1.0 - p1);
  }
  return std::clamp(risk, 0.0, 1.0);
}

Vec network_risks(const MetaConfig& cfg, std::size_t count, const Hypothesis& h, const LossFn& loss_fn,
                  std::size_t mc_samples, unsigned jobs) {
  const auto specs = sample_clients(cfg, count);
  Vec out(count);
  parallel_for(count, jobs, [&](std::size_t k) { out[k] = client_risk(cfg, specs[k], h, loss_fn, mc_samples); });
  return out;
}

double survival(const Vec& values, double lambda) {
  if (values.empty()) return 0.0;
  std::size_t count = 0;
  for (double v : values)
    if (v >= lambda) ++count;
  return static_cast<double>(count) / static_cast<double>(values.size());
}

std::string to_string(ShiftKind kind) {
  switch (kind) {
    case ShiftKind::kNone: return "none";
    case ShiftKind::kFdiv: return "fdiv";
    case ShiftKind::kWass: return "wass";
  }
  return "none";
}

ShiftKind parse_shift_kind(const std::string& name) {
  if (name == "none") return ShiftKind::kNone;
  if (name == "fdiv") return ShiftKind::kFdiv;
  if (name == "wass") return ShiftKind::kWass;
  throw std::invalid_argument("unknown shift kind: " + name);
}

json BoundRequest::to_json() const {
  json j = {{"name", name},
            {"kind", to_string(kind)},
            {"delta", delta},
            {"epsilon", epsilon},
            {"slack_mode", fdiv.slack == SlackMode::kFull ? "full" : "zero"}};
  if (kind == BoundKind::kFdivMean || kind == BoundKind::kFdivCdf) {
    j["divergence"] = to_string(divergence);
    j["cdf_constant"] = fdiv.cdf_constant;
  }
  if (kind == BoundKind::kWassMean) {
    j["Delta"] = wass.Delta;
    j["grid_size"] = wass.grid_size;
    j["c1"] = wass.c1;
    j["c2"] = wass.c2;
  }
  if (is_curve()) j["lambda_grid"] = lambda_grid;
  return j;
}

BoundResult compute_bound(Network& network, const Hypothesis& h, const LossFn& loss_fn,
                          const BoundRequest& request) {
  BoundResult out;
  const Vec grid = request.lambda_grid.empty() ? linspace(0.0, 1.0, 51) : request.lambda_grid;
  if (request.kind == BoundKind::kWassMean) {
    out.mean = wass_mean_bound(network, h, loss_fn, request.epsilon, request.delta, request.wass);
    out.headline = out.mean.value;
    return out;
  }
  const Vec qv = network.query_all(h, loss_fn, request.fdiv.jobs);
  const auto n = network.sample_counts();
  switch (request.kind) {
    case BoundKind::kMean: out.mean = mean_bound(qv, n, request.delta, request.fdiv.slack); break;
    case BoundKind::kCdfCurve: out.curve = cdf_bound(qv, n, request.delta, grid, request.fdiv.slack); break;
    case BoundKind::kFdivMean:
      out.mean = fdiv_mean_bound(qv, n, request.delta, request.epsilon, request.divergence, request.fdiv);
      break;
    case BoundKind::kFdivCdf:
      out.curve = fdiv_cdf_bound(qv, n, request.delta, request.epsilon, request.divergence, grid, request.fdiv);
      break;
    case BoundKind::kWassMean: break;
  }
  out.headline = request.is_curve() ? out.curve.bound.front() : out.mean.value;
  return out;
}

ResolvedShift resolve_shift(const MetaConfig& world, const BoundRequest& bound, const TargetShift& shift) {
  const bool fdiv_bound = bound.kind == BoundKind::kFdivMean || bound.kind == BoundKind::kFdivCdf;
  const bool wass_bound = bound.kind == BoundKind::kWassMean;
  if (shift.kind == ShiftKind::kFdiv && !fdiv_bound)
    throw std::invalid_argument("shift/bound mismatch: an f-divergence shift needs an fdiv-* bound, got " +
                                to_string(bound.kind));
  if (shift.kind == ShiftKind::kWass && !wass_bound)
    throw std::invalid_argument("shift/bound mismatch: a Wasserstein shift needs a wass-mean bound, got " +
                                to_string(bound.kind));
  ResolvedShift out;
  out.config = world;
  if (shift.kind == ShiftKind::kNone) return out;
  const double amount = shift.amount < 0.0 ? bound.epsilon : shift.amount;
  if (amount > bound.epsilon + 1e-12)
    throw std::invalid_argument("shift amount exceeds the certified epsilon");
  if (shift.kind == ShiftKind::kFdiv) {
    const double tilt = tilt_for_divergence(world, bound.divergence, amount);
    const FdivShift s = shift_meta_fdiv(world, tilt);
    out.config = s.config;
    out.achieved = s.divergence(bound.divergence);
  } else {
    if (shift.directions.empty()) throw std::invalid_argument("Wasserstein shift needs per-class directions");
    const WassShift s = shift_meta_wass(world, amount, shift.directions, shift.cost);
    out.config = s.config;
    out.achieved = s.cost;
  }
  out.within_budget = out.achieved <= bound.epsilon + 1e-12;
  return out;
}

namespace {

struct TrialOutcome {
  double bound = 0.0;
  double raw_bound = 0.0;
  double slack = 0.0;
  double target_mean = 0.0;
  Vec curve_at;   // bound at each evaluation lambda
  Vec target_survival;
};

void check_spec(const CoverageSpec& spec) {
  if (spec.trials < 1) throw std::invalid_argument("coverage: trials must be >= 1");
  if (spec.clients < 1 || spec.samples < 1 || spec.target_clients < 1)
    throw std::invalid_argument("coverage: clients, samples and target clients must be >= 1");
  if (spec.shift.kind == ShiftKind::kWass && spec.shift.cost != spec.query_cost)
    throw std::invalid_argument("coverage: attack cost and query cost must match");
}

TrialOutcome run_trial(const CoverageSpec& spec, const MetaConfig& target_cfg, const Vec& grid, std::size_t t) {
  MetaConfig src = spec.world;
  src.seed = derive_seed(spec.seed, stream::kTrial, t);
  World w = make_world(src, spec.clients, spec.samples);
  Network net(std::move(w.datasets), spec.max_queries, TransportCost{spec.query_cost});
  BoundRequest req = spec.bound;
  req.fdiv.jobs = 1;
  req.wass.jobs = 1;
  const BoundResult br = compute_bound(net, spec.model, spec.loss, req);

  MetaConfig tgt = target_cfg;
  tgt.seed = derive_seed(spec.seed, stream::kTarget, t);
  const Vec risks = network_risks(tgt, spec.target_clients, spec.model, spec.loss, spec.risk_samples);

  TrialOutcome o;
  o.target_mean = std::accumulate(risks.begin(), risks.end(), 0.0) / static_cast<double>(risks.size());
  if (spec.bound.is_curve()) {
    for (double lam : grid) {
      o.curve_at.push_back(br.curve.at(lam));
      o.target_survival.push_back(survival(risks, lam));
    }
    o.bound = br.headline;
  } else {
    o.bound = br.mean.value;
    o.raw_bound = br.mean.raw_value;
    o.slack = br.mean.slack_total();
  }
  return o;
}

constexpr double kGuard = 1e-9;

}  // namespace

bool CoverageReport::passes() const {
  return violation_rate <= threshold + 1e-12 && max_lambda_rate <= threshold + 1e-12;
}

json CoverageReport::to_json() const {
  json j = {{"name", name},
            {"kind", to_string(kind)},
            {"trials", trials},
            {"violations", violations},
            {"violation_rate", violation_rate},
            {"delta", delta},
            {"threshold", threshold},
            {"passes", passes()},
            {"world_digest", world_digest},
            {"achieved_shift", achieved_shift},
            {"mean_bound", mean_bound},
            {"mean_target", mean_target}};
  if (!lambda.empty()) {
    j["lambda"] = lambda;
    j["lambda_violations"] = lambda_violations;
    j["max_lambda_rate"] = max_lambda_rate;
  }
  return j;
}

std::string CoverageReport::to_csv() const {
  std::string out = "lambda,violations,rate\n";
  for (std::size_t i = 0; i < lambda.size(); ++i)
    out += fmt::format("{},{},{}\n", lambda[i], lambda_violations[i],
                       static_cast<double>(lambda_violations[i]) / static_cast<double>(trials));
  return out;
}

CoverageReport coverage_experiment(const CoverageSpec& spec) {
  check_spec(spec);
  const ResolvedShift target = resolve_shift(spec.world, spec.bound, spec.shift);
  const Vec grid = spec.bound.lambda_grid.empty() ? linspace(0.0, 1.0, 51) : spec.bound.lambda_grid;
  std::vector<TrialOutcome> outcomes(spec.trials);
  parallel_for(spec.trials, spec.jobs, [&](std::size_t t) { outcomes[t] = run_trial(spec, target.config, grid, t); });

  CoverageReport r;
  r.name = spec.bound.name;
  r.kind = spec.bound.kind;
  r.trials = spec.trials;
  r.delta = spec.bound.delta;
  r.threshold = r.delta + 3.0 * std::sqrt(r.delta * (1.0 - r.delta) / static_cast<double>(spec.trials));
  r.world_digest = json_digest(spec.world.to_json());
  r.achieved_shift = target.achieved;
  const bool curve = spec.bound.is_curve();
  if (curve) {
    r.lambda = grid;
    r.lambda_violations.assign(grid.size(), 0);
  }
  for (const auto& o : outcomes) {
    r.mean_bound += o.bound;
    r.mean_target += o.target_mean;
    bool violated = false;
    if (curve) {
      for (std::size_t i = 0; i < grid.size(); ++i)
        if (o.target_survival[i] > o.curve_at[i] + kGuard) {
          ++r.lambda_violations[i];
          violated = true;
        }
    } else {
      violated = o.target_mean > o.bound + kGuard;
    }
    if (violated) ++r.violations;
  }
  const double T = static_cast<double>(spec.trials);
  r.mean_bound /= T;
  r.mean_target /= T;
  r.violation_rate = static_cast<double>(r.violations) / T;
  for (std::size_t v : r.lambda_violations) r.max_lambda_rate = std::max(r.max_lambda_rate, static_cast<double>(v) / T);
  return r;
}

json TightnessReport::to_json() const {
  json rows_json = json::array();
  for (const auto& r : rows)
    rows_json.push_back({{"K", r.K},
                         {"n", r.n},
                         {"trials", r.trials},
                         {"median_gap", r.median_gap},
                         {"se", r.se},
                         {"mean_bound", r.mean_bound},
                         {"mean_target", r.mean_target},
                         {"slack", r.slack}});
  return {{"rows", rows_json},
          {"strictly_decreasing", strictly_decreasing},
          {"decreasing_within_noise", decreasing_within_noise}};
}

std::string TightnessReport::to_csv() const {
  std::string out = "K,n,trials,median_gap,se,mean_bound,mean_target,slack\n";
  for (const auto& r : rows)
    out += fmt::format("{},{},{},{},{},{},{},{}\n", r.K, r.n, r.trials, r.median_gap, r.se, r.mean_bound,
                       r.mean_target, r.slack);
  return out;
}

TightnessReport tightness_probe(const CoverageSpec& base, const std::vector<std::size_t>& K_schedule,
                                const std::vector<std::size_t>& n_schedule) {
  if (K_schedule.empty() || K_schedule.size() != n_schedule.size())
    throw std::invalid_argument("tightness_probe: K and n schedules must be nonempty and equally long");
  for (std::size_t i = 1; i < K_schedule.size(); ++i)
    if (K_schedule[i] <= K_schedule[i - 1] || n_schedule[i] < n_schedule[i - 1])
      throw std::invalid_argument("tightness_probe: schedules must be increasing");
  if (base.bound.is_curve()) throw std::invalid_argument("tightness_probe: needs a mean bound kind");
  check_spec(base);
  const ResolvedShift target = resolve_shift(base.world, base.bound, base.shift);

  TightnessReport report;
  for (std::size_t s = 0; s < K_schedule.size(); ++s) {
    CoverageSpec spec = base;
    spec.clients = K_schedule[s];
    spec.samples = n_schedule[s];
    spec.seed = derive_seed(base.seed, stream::kTrial, 1000003 + s);
    std::vector<TrialOutcome> outcomes(spec.trials);
    parallel_for(spec.trials, spec.jobs, [&](std::size_t t) { outcomes[t] = run_trial(spec, target.config, {}, t); });
    // Gaps use the unclipped certificate so that saturation at 1 does not
    // flatten the comparison across sizes.
    Vec gaps;
    TightnessRow row;
    row.K = spec.clients;
    row.n = spec.samples;
    row.trials = spec.trials;
    for (const auto& o : outcomes) {
      gaps.push_back(o.raw_bound - o.target_mean);
      row.mean_bound += o.raw_bound;
      row.mean_target += o.target_mean;
      row.slack += o.slack;
    }
    const double T = static_cast<double>(spec.trials);
    row.mean_bound /= T;
    row.mean_target /= T;
    row.slack /= T;
    std::sort(gaps.begin(), gaps.end());
    const std::size_t mid = gaps.size() / 2;
    row.median_gap = gaps.size() % 2 ? gaps[mid] : 0.5 * (gaps[mid - 1] + gaps[mid]);
    double mean = std::accumulate(gaps.begin(), gaps.end(), 0.0) / T, var = 0.0;
    for (double g : gaps) var += (g - mean) * (g - mean);
    var = gaps.size() > 1 ? var / (T - 1.0) : 0.0;
    // Large-sample standard error of a median under normality.
    row.se = 1.2533 * std::sqrt(var / T);
    report.rows.push_back(row);
  }
  report.strictly_decreasing = report.decreasing_within_noise = true;
  for (std::size_t i = 1; i < report.rows.size(); ++i) {
    const auto& a = report.rows[i - 1];
    const auto& b = report.rows[i];
    if (!(b.median_gap < a.median_gap)) report.strictly_decreasing = false;
    if (!(b.median_gap < a.median_gap + 2.0 * std::sqrt(a.se * a.se + b.se * b.se)))
      report.decreasing_within_noise = false;
  }
  return report;
}

std::string json_digest(const json& j) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : j.dump()) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return fmt::format("{:016x}", h);
}

}  // namespace fedcert
